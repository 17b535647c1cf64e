import pytest
from pydantic import ValidationError

from homforge.config import Settings, get_settings
from homforge.types import Caps, RunConfig


def test_settings_defaults(monkeypatch):
    for name in ("HOMFORGE_CAP", "HOMFORGE_METRICS_PATH", "LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    settings = Settings(_env_file=None)
    assert settings.size_cap == 1_000_000
    assert settings.caps() == Caps()
    assert not settings.metrics_enabled()


def test_settings_read_environment(monkeypatch):
    monkeypatch.setenv("HOMFORGE_CAP", "1e4")
    monkeypatch.setenv("LOG_LEVEL", " debug ")
    monkeypatch.setenv("HOMFORGE_METRICS_PATH", "/tmp/homforge.prom")
    settings = Settings(_env_file=None)
    assert settings.size_cap == 10_000
    assert settings.log_level == "DEBUG"
    assert settings.caps().size_cap == 10_000
    assert settings.metrics_enabled()


def test_settings_accept_underscored_integers(monkeypatch):
    monkeypatch.setenv("HOMFORGE_CAP", "2_000")
    assert Settings(_env_file=None).size_cap == 2000


def test_get_settings_is_cached(monkeypatch):
    get_settings.cache_clear()
    assert get_settings() is get_settings()
    get_settings.cache_clear()


def test_randomized_runs_require_seed():
    with pytest.raises(ValidationError) as excinfo:
        RunConfig(subcommand="witness", randomized=True)
    assert "SEED_REQUIRED" in str(excinfo.value)
    assert RunConfig(subcommand="witness", randomized=True, seed=0).seed == 0


def test_run_config_ranges():
    with pytest.raises(ValidationError):
        RunConfig(subcommand="approx-hom", eps=0.0)
    with pytest.raises(ValidationError):
        RunConfig(subcommand="mycielski", t=0)
    with pytest.raises(ValidationError):
        Caps(witness_max_copies=17)
