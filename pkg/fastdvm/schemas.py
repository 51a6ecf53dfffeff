"""
Pydantic schemas for grid geometry, diagnostics and experiment configuration
"""
import math
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

OperatorName = Literal["truncated", "classical", "pseudospectral", "fast"]
ModelName = Literal["maxwell2d", "hardsphere3d"]
WeightConvention = Literal["lattice", "carleman"]
TruncationRule = Literal["default", "halved"]
LineWeighting = Literal["plain", "angular"]

# Box half-widths used for the BKW accuracy runs, keyed by N
DEFAULT_BOXES: Dict[int, float] = {8: 5.0, 16: 5.5, 32: 7.0, 64: 8.0, 128: 8.0}


# Grid
class GridSpec(BaseModel):
    """Velocity grid [-N, N]^d with step h = 2T/(2N+1) and truncations N_bar <= N_tilde <= N"""

    model_config = ConfigDict(frozen=True)

    d: int
    N: int
    T: float
    h: float
    n_tilde: int
    n_bar: int

    @model_validator(mode="after")
    def check_invariants(self):
        if self.d not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.d}")
        if not (1 <= self.n_bar <= self.n_tilde <= self.N):
            raise ValueError(
                f"truncation order violated: need 1 <= n_bar ({self.n_bar}) <= "
                f"n_tilde ({self.n_tilde}) <= N ({self.N})"
            )
        if self.T <= 0 or self.h <= 0:
            raise ValueError("T and h must be positive")
        if not math.isclose(self.h * (2 * self.N + 1), 2 * self.T, rel_tol=1e-12):
            raise ValueError("h must equal 2T/(2N+1)")
        return self

    @property
    def n(self) -> int:
        """Points per axis (odd)"""
        return 2 * self.N + 1

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def size(self) -> int:
        return self.n ** self.d

    @property
    def cell_volume(self) -> float:
        return self.h ** self.d


# Diagnostics
class MomentReport(BaseModel):
    """Conserved quantities, entropy and positivity diagnostics of a field"""

    mass: float
    momentum: List[float]
    energy: float
    entropy: float
    min_value: float
    negative_mass_fraction: float
    nonpositive_count: int = 0
    mean_velocity: List[float] = Field(default_factory=list)
    temperature: float = 0.0


class ErrorReport(BaseModel):
    """Relative L1 and max-norm distance between a numerical and a reference field"""

    rel_l1: float = Field(ge=0)
    linf: float = Field(ge=0)
    time: float


# Configuration
class GridConfig(BaseModel):
    d: int = 2
    N: int = Field(ge=2)
    T: float = Field(gt=0)
    n_tilde: Optional[int] = None
    n_bar: Optional[int] = None
    truncation_rule: TruncationRule = "default"
    line_weights: LineWeighting = "plain"

    @model_validator(mode="after")
    def check_truncations(self):
        if self.d not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.d}")
        if self.n_tilde is not None and not (1 <= self.n_tilde <= self.N):
            raise ValueError(f"n_tilde ({self.n_tilde}) must lie in [1, N={self.N}]")
        if self.n_bar is not None and self.n_bar < 1:
            raise ValueError("n_bar must be >= 1")
        if self.n_bar is not None and self.n_tilde is not None and self.n_bar > self.n_tilde:
            raise ValueError(f"n_bar ({self.n_bar}) exceeds n_tilde ({self.n_tilde})")
        return self


class ModelConfig(BaseModel):
    name: ModelName = "maxwell2d"
    weights: WeightConvention = "lattice"


class TimeLoopConfig(BaseModel):
    dt: float = Field(default=0.01, gt=0)
    t_end: float = Field(default=1.0, ge=0)
    operator: OperatorName = "fast"
    record_every: int = Field(default=1, ge=1)
    clamp_negatives: bool = False
    compensated: bool = False

    @model_validator(mode="after")
    def check_end_time(self):
        steps = round(self.t_end / self.dt)
        if abs(steps * self.dt - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise ValueError(
                f"t_end ({self.t_end}) is not a multiple of dt ({self.dt}); "
                f"the nearest reachable end time is {steps * self.dt:.12g}"
            )
        return self

    @property
    def steps(self) -> int:
        """Number of steps reaching t_end"""
        return int(round(self.t_end / self.dt))


class InitialCondition(BaseModel):
    kind: Literal["bkw", "maxwellian", "bump", "random"] = "bkw"
    t0: float = Field(default=0.0, ge=0)
    rho: float = Field(default=1.0, gt=0)
    u: Optional[List[float]] = None
    temperature: float = Field(default=1.0, gt=0)
    radius: float = Field(default=1.0, gt=0)  # support radius of the compact bump


class SimulationConfig(BaseModel):
    """Full description of one time-dependent run"""

    grid: GridConfig
    model: ModelConfig = Field(default_factory=ModelConfig)
    time: TimeLoopConfig = Field(default_factory=TimeLoopConfig)
    initial: InitialCondition = Field(default_factory=InitialCondition)
    track_error: bool = True
    seed: int = 0
    output_prefix: str = "run"
    deterministic: bool = True
    cache_tables: bool = False

    @model_validator(mode="after")
    def check_consistency(self):
        expected = {"maxwell2d": 2, "hardsphere3d": 3}[self.model.name]
        if self.grid.d != expected:
            raise ValueError(f"model {self.model.name} requires d={expected}, got d={self.grid.d}")
        if self.initial.kind == "bkw" and self.grid.d != 2:
            raise ValueError("the BKW initial condition exists only for d=2")
        if self.track_error and (self.initial.kind != "bkw" or self.model.name != "maxwell2d"):
            # the exact reference exists only for 2D Maxwell molecules
            self.track_error = False
        if self.initial.u is not None and len(self.initial.u) != self.grid.d:
            raise ValueError("initial.u must have d components")
        return self


class Table1Config(BaseModel):
    """Accuracy table: relative L1 error after a few steps from BKW(t0)"""

    sizes: List[int] = Field(default_factory=lambda: [8, 16, 32, 64])
    n_bars: List[int] = Field(default_factory=lambda: [1, 3, 7, 14])
    boxes: Dict[int, float] = Field(default_factory=lambda: dict(DEFAULT_BOXES))
    truncation_rule: TruncationRule = "halved"
    weights: WeightConvention = "carleman"
    line_weights: LineWeighting = "angular"
    include_classical: bool = True
    classical_max_N: int = 64
    dt: float = Field(default=0.01, gt=0)
    steps: int = Field(default=1, ge=1)
    t0: float = Field(default=0.0, ge=0)
    cell_budget_seconds: Optional[float] = None
    output_prefix: str = "table1"

    @field_validator("sizes")
    @classmethod
    def sizes_have_boxes(cls, v):
        if not v:
            raise ValueError("sizes must not be empty")
        return sorted(v)

    @model_validator(mode="after")
    def check_boxes(self):
        missing = [n for n in self.sizes if n not in self.boxes]
        if missing:
            raise ValueError(f"no box half-width configured for N={missing}")
        return self


class BenchConfig(BaseModel):
    """Timing sweep of one full RK2 step"""

    sizes: List[int] = Field(default_factory=lambda: [32, 64, 128])
    fixed_n_bar: int = 3
    n_bar_sweep: List[int] = Field(default_factory=lambda: [3, 7, 14, 28])
    n_bar_sweep_N: int = 128
    classical_sizes: List[int] = Field(default_factory=lambda: [16, 32, 64])
    speedup_N: int = 64
    speedup_n_bar: int = 7
    boxes: Dict[int, float] = Field(default_factory=lambda: dict(DEFAULT_BOXES))
    truncation_rule: TruncationRule = "halved"
    weights: WeightConvention = "carleman"
    dt: float = Field(default=0.01, gt=0)
    repeats: Optional[int] = Field(default=None, ge=1)
    warmup: Optional[int] = Field(default=None, ge=0)
    cell_budget_seconds: Optional[float] = None
    output_prefix: str = "bench"


class FareyConfig(BaseModel):
    d: int = 2
    n_bar_min: int = Field(default=1, ge=1)
    n_bar_max: int = Field(default=50, ge=1)
    output_prefix: str = "farey"

    @model_validator(mode="after")
    def check_range(self):
        if self.d not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.d}")
        if self.n_bar_max < self.n_bar_min:
            raise ValueError("n_bar_max must be >= n_bar_min")
        return self
