from __future__ import annotations

from enum import Enum
from pathlib import Path

from pydantic import BaseModel, Field, model_validator


class SearchStatus(str, Enum):
    FOUND = "found"
    NONE = "none"
    UNKNOWN = "unknown"


class HomFreeness(str, Enum):
    FREE = "free"
    NOT_FREE = "not-free"
    UNKNOWN = "unknown"


class DominationMode(str, Enum):
    MINDEG = "mindeg"
    DOMINATION = "domination"
    VC = "vc"


class ApproxRoute(str, Enum):
    FK = "fk"
    PULLOUT = "pullout"
    PULLOUT_DOMINATION = "pullout-domination"


class WitnessMode(str, Enum):
    THM113 = "thm113"
    PROP51 = "prop51"


class SubgraphMode(str, Enum):
    EXACT = "exact"
    GREEDY = "greedy"


class DensityMode(str, Enum):
    EXACT = "exact"
    MC = "mc"


class Caps(BaseModel):
    size_cap: int = Field(default=1_000_000, ge=1)
    hom_budget: int = Field(default=10_000_000, ge=1)
    domination_limit: int = Field(default=24, ge=1, le=40)
    vc_cap: int = Field(default=8, ge=1, le=16)
    density_limit: int = Field(default=100_000_000, ge=1)
    mvm_cap: int = Field(default=10_000_000, ge=1)
    mvm_node_budget: int = Field(default=5_000_000, ge=1)
    witness_max_copies: int = Field(default=6, ge=0, le=16)


DEFAULT_BUNDLE_CONTRACT = [
    "h.hg",
    "g.el",
    "gstar.el",
    "gstar.lab",
    "report.txt",
    "run.jsonl",
]


class CertificateClaims(BaseModel):
    pipeline: str
    t: int
    n: int
    edges: int
    k: int
    target_vertices: int
    target_edges: int
    size_bound: int
    size_bound_expr: str
    size_within_bound: bool
    required_odd_girth: int
    target_odd_girth: int | None
    odd_girth_ok: bool
    violations: int
    layer_sizes: list[int] = Field(default_factory=list)
    dominating_set_size: int | None = None
    vc_dimension: str | None = None
    net_size_bound: float | None = None
    warnings: list[str] = Field(default_factory=list)

    @property
    def verified(self) -> bool:
        return self.size_within_bound and self.odd_girth_ok and self.violations == 0


class ApproxHomReport(BaseModel):
    n: int
    edges: int
    target_vertices: int
    eps: float
    violations: int
    threshold: float
    passed: bool
    pattern_freeness: str


class Prop18Report(BaseModel):
    n: int
    edges: int
    eps: float
    parts: int
    k_expr: str
    m_theory: str
    fk_converged: bool
    gamma0_edges: int
    gamma_edges: int
    subgraph_mode: str
    host_freeness: str
    pattern_freeness: str
    violations: int
    within_part: int
    low_density: int
    deleted_pairs: int
    threshold: float
    passed: bool
    warnings: list[str] = Field(default_factory=list)


class Thm110Report(BaseModel):
    route: str
    n: int
    edges: int
    eps: float
    k: int
    set_size: int
    k_bound: float
    k_floor_bound: int
    target_vertices: int
    target_bound: float
    incident_to_leftover: int
    within_sets: int
    violations: int
    threshold: float
    passed: bool
    pattern_freeness: str
    warnings: list[str] = Field(default_factory=list)


class EntropySummary(BaseModel):
    base_vertices: int
    copies: int
    max_label: int
    mode: str
    total_information: float
    max_information: float
    superadditivity_ok: bool
    identity_ok: bool
    bad_edges: int | None = None


class WitnessReport(BaseModel):
    mode: str
    f_vertices: int
    h_vertices: int
    girth_parameter: int
    eps: float
    seed: int
    n: int
    hyperedges: int
    hyperedges_used: int
    berge_girth_ok: bool
    unique_cover: bool
    star_vertices: int
    star_edges: int
    star_odd_girth: int | None
    pattern_freeness: str
    eps_threshold_expr: str
    size_bound_expr: str
    candidate_minimum: list[str] = Field(default_factory=list)
    warnings: list[str] = Field(default_factory=list)


class RunConfig(BaseModel):
    subcommand: str
    inputs: dict[str, Path] = Field(default_factory=dict)
    outputs: dict[str, Path] = Field(default_factory=dict)
    t: int | None = Field(default=None, ge=1)
    eps: float | None = Field(default=None, gt=0.0, le=1.0)
    delta: float | None = Field(default=None, gt=0.0, le=1.0)
    m_override: int | None = Field(default=None, ge=1)
    n: int | None = Field(default=None, ge=1)
    uniformity: int | None = Field(default=None, ge=2)
    girth: int | None = Field(default=None, ge=2)
    seed: int | None = Field(default=None, ge=0)
    randomized: bool = False
    caps: Caps = Field(default_factory=Caps)
    verbose: bool = False

    @model_validator(mode="after")
    def require_seed_for_randomized(self) -> RunConfig:
        if self.randomized and self.seed is None:
            raise ValueError("SEED_REQUIRED: randomized runs need an explicit --seed")
        return self
