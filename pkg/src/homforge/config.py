from functools import lru_cache

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from homforge.types import Caps


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8")

    app_env: str = Field(default="dev", alias="APP_ENV")
    log_level: str = Field(default="WARNING", alias="LOG_LEVEL")

    size_cap: int = Field(default=1_000_000, alias="HOMFORGE_CAP", ge=1)
    hom_budget: int = Field(default=10_000_000, alias="HOMFORGE_HOM_BUDGET", ge=1)
    domination_limit: int = Field(default=24, alias="HOMFORGE_DOMINATION_LIMIT", ge=1, le=40)
    vc_cap: int = Field(default=8, alias="HOMFORGE_VC_CAP", ge=1, le=16)
    density_limit: int = Field(default=100_000_000, alias="HOMFORGE_DENSITY_LIMIT", ge=1)
    mvm_cap: int = Field(default=10_000_000, alias="HOMFORGE_MVM_CAP", ge=1)
    mvm_node_budget: int = Field(default=5_000_000, alias="HOMFORGE_MVM_NODE_BUDGET", ge=1)
    witness_max_copies: int = Field(default=6, alias="HOMFORGE_WITNESS_MAX_COPIES", ge=0, le=16)

    profile_path: str = Field(default="config/selfcheck.yaml", alias="HOMFORGE_PROFILE")
    metrics_path: str = Field(default="", alias="HOMFORGE_METRICS_PATH")

    @field_validator("log_level", mode="before")
    @classmethod
    def normalize_log_level(cls, value):
        if isinstance(value, str):
            return value.strip().upper() or "WARNING"
        return value

    @field_validator("size_cap", mode="before")
    @classmethod
    def normalize_size_cap(cls, value):
        # accepts "1e6" and "1_000_000" in the environment
        if isinstance(value, str):
            cleaned = value.strip().replace("_", "")
            if cleaned and any(ch in cleaned for ch in "eE."):
                return int(float(cleaned))
            return cleaned
        return value

    def caps(self) -> Caps:
        return Caps(
            size_cap=self.size_cap,
            hom_budget=self.hom_budget,
            domination_limit=self.domination_limit,
            vc_cap=self.vc_cap,
            density_limit=self.density_limit,
            mvm_cap=self.mvm_cap,
            mvm_node_budget=self.mvm_node_budget,
            witness_max_copies=self.witness_max_copies,
        )

    def metrics_enabled(self) -> bool:
        return bool(self.metrics_path.strip())


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()
