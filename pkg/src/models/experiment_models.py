"""
Experiment models - the versioned YAML experiment config and the run manifest.
"""

import hashlib
import json
from datetime import datetime
from enum import Enum
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..consts import (
    DEFAULT_BLOWUP_THRESHOLD, DEFAULT_OUTPUT_DIR, EXPERIMENT_SCHEMA_VERSION, FHNLS_VERSION,
    GROUND_STATE_DEFAULT_MAX_ITER, GROUND_STATE_DEFAULT_TOL, INEQUALITY_DEFAULT_SAMPLES,
    MIN_POINTS_PER_AXIS
)
from .evolution_models import StepController
from .hartree_models import PotentialSpec
from .spectral_models import Grid, SymbolKind


class ExperimentKind(str, Enum):
    EVOLVE = "evolve"
    BLOWUP_SCAN = "blowup_scan"
    MASS_THRESHOLD = "mass_threshold"
    SCATTERING = "scattering"
    LIMIT_M_TO_ZERO = "limit_m_to_zero"
    LIMIT_M_TO_INFINITY = "limit_m_to_infinity"
    GROUND_STATE = "ground_state"
    INEQUALITIES = "inequalities"


EVOLUTION_EXPERIMENTS = {
    ExperimentKind.EVOLVE,
    ExperimentKind.BLOWUP_SCAN,
    ExperimentKind.MASS_THRESHOLD,
    ExperimentKind.SCATTERING,
    ExperimentKind.LIMIT_M_TO_ZERO,
    ExperimentKind.LIMIT_M_TO_INFINITY,
}


class RunStatus(str, Enum):
    COMPLETED = "completed"
    FAILED = "failed"
    ERROR = "error"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridConfig(_Section):
    dim: int = Field(..., ge=1, le=3, description="Spatial dimension n")
    points_per_axis: int = Field(..., ge=MIN_POINTS_PER_AXIS, description="Samples per axis N (even)")
    half_length: float = Field(..., gt=0, description="Half box length L")

    @field_validator('points_per_axis')
    @classmethod
    def _even(cls, value: int) -> int:
        if value % 2:
            raise ValueError(f"points_per_axis must be even, got {value}")
        return value

    def build(self) -> Grid:
        return Grid(self.dim, self.points_per_axis, self.half_length)


class PhysicsConfig(_Section):
    mass: float = Field(default=1.0, ge=0, description="Dispersion mass m")
    alpha: float = Field(default=1.5, gt=0, le=2, description="Dispersion exponent alpha")
    gamma: float = Field(default=1.0, gt=0, description="Kernel exponent gamma")
    lam: Literal[-1, 1] = Field(default=1, description="+1 defocusing, -1 focusing")
    psi: str = Field(default="one", description="'one', 'zero' or a CSV table of (r, psi[, dpsi])")
    dispersion: SymbolKind = Field(default=SymbolKind.RELATIVISTIC)

    @model_validator(mode="after")
    def _mass_for_nonrelativistic(self) -> 'PhysicsConfig':
        if self.dispersion == SymbolKind.NONRELATIVISTIC and not self.mass > 0:
            raise ValueError("physics.mass must be positive for the nonrelativistic dispersion")
        return self

    def potential_spec(self) -> PotentialSpec:
        if self.psi == "one":
            return PotentialSpec(gamma=self.gamma, lam=self.lam)
        if self.psi == "zero":
            return PotentialSpec(gamma=self.gamma, lam=self.lam, psi_constant=0.0)
        return PotentialSpec.from_csv(self.psi, gamma=self.gamma, lam=self.lam)


class GaussianData(_Section):
    kind: Literal["gaussian"] = "gaussian"
    width: float = Field(default=1.0, gt=0)
    amplitude: float = 1.0
    chirp: float = 0.0
    center: Optional[List[float]] = None


class PlaneModulatedData(_Section):
    kind: Literal["plane_modulated"] = "plane_modulated"
    width: float = Field(default=1.0, gt=0)
    amplitude: float = 1.0
    wavevector: List[float] = Field(default_factory=list)


class FromCheckpointData(_Section):
    kind: Literal["from_checkpoint"] = "from_checkpoint"
    path: str


class GroundStateRescaledData(_Section):
    kind: Literal["ground_state_rescaled"] = "ground_state_rescaled"
    mass: float = Field(..., gt=0, description="Target ||phi||^2")
    concentration: float = Field(default=1.0, gt=0, description="L^2-preserving dilation factor b")


InitialData = Annotated[
    Union[GaussianData, PlaneModulatedData, FromCheckpointData, GroundStateRescaledData],
    Field(discriminator="kind"),
]


class TimeConfig(_Section):
    t_final: float = Field(..., gt=0)
    dt: float = Field(..., gt=0)
    adaptive: bool = False
    energy_tol: Optional[float] = Field(default=None, gt=0)
    dt_min: Optional[float] = Field(default=None, gt=0)
    dt_max: Optional[float] = Field(default=None, gt=0)
    observer_interval: Optional[float] = Field(default=None, gt=0, description="Observation cadence in time units")
    blowup_threshold: float = Field(default=DEFAULT_BLOWUP_THRESHOLD, gt=1)
    checkpoint_interval: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _adaptive_needs_tol(self) -> 'TimeConfig':
        if self.adaptive and self.energy_tol is None:
            raise ValueError("time.energy_tol is required when time.adaptive is true")
        return self

    def controller(self) -> StepController:
        if self.adaptive:
            return StepController.adaptive(
                self.dt, self.energy_tol, dt_min=self.dt_min, dt_max=self.dt_max,
                blowup_threshold=self.blowup_threshold, observer_interval=self.observer_interval,
            )
        return StepController.fixed(
            self.dt, blowup_threshold=self.blowup_threshold, observer_interval=self.observer_interval
        )


class OutputConfig(_Section):
    directory: str = DEFAULT_OUTPUT_DIR
    write_checkpoint: bool = True


class SweepConfig(_Section):
    """Parameters of the scan and limit experiments."""
    masses: List[float] = Field(default_factory=list, description="Dispersion masses m for the limit runs")
    mass_factors: List[float] = Field(
        default_factory=lambda: [0.25, 0.64, 1.44, 2.25, 4.0],
        description="||phi||^2 as multiples of the ground-state threshold mass",
    )
    sub_threshold_amplitude: float = Field(default=0.9, gt=0, lt=1)
    super_threshold_amplitude: float = Field(default=1.2, gt=1)
    concentration: float = Field(default=1.0, gt=0, description="Dilation applied above the threshold")
    sobolev_s: Optional[float] = Field(default=None, ge=0, description="Comparison norm index; gamma/2 if unset")
    strichartz_q: float = Field(default=4.0, ge=2)
    strichartz_r: Optional[float] = Field(default=None, ge=2)


class GroundStateConfig(_Section):
    tol: float = Field(default=GROUND_STATE_DEFAULT_TOL, gt=0)
    max_iter: int = Field(default=GROUND_STATE_DEFAULT_MAX_ITER, ge=1)
    polish_max_iter: int = Field(default=2000, ge=0)


class InequalityConfig(_Section):
    suite: Union[str, List[str]] = "all"
    samples: int = Field(default=INEQUALITY_DEFAULT_SAMPLES, ge=1)
    refine: bool = True
    baseline: Optional[str] = Field(default=None, description="Frozen ratios to compare against")
    freeze: bool = Field(default=False, description="Write the worst ratios as a new baseline")


class ExperimentConfig(_Section):
    """One experiment, as read from a YAML document."""
    schema_version: Literal[1] = EXPERIMENT_SCHEMA_VERSION
    experiment: ExperimentKind
    grid: GridConfig
    physics: PhysicsConfig = Field(default_factory=PhysicsConfig)
    initial_data: InitialData = Field(default_factory=GaussianData)
    time: Optional[TimeConfig] = None
    output: OutputConfig = Field(default_factory=OutputConfig)
    seed: int = 0
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    ground_state: GroundStateConfig = Field(default_factory=GroundStateConfig)
    inequalities: InequalityConfig = Field(default_factory=InequalityConfig)

    @model_validator(mode="after")
    def _check_preconditions(self) -> 'ExperimentConfig':
        n = self.grid.dim
        physics = self.physics
        kind = self.experiment
        if not physics.gamma < n:
            raise ValueError(f"physics.gamma must lie in (0, {n}), got {physics.gamma}")
        data = self.initial_data
        if isinstance(data, GaussianData) and data.center is not None and len(data.center) != n:
            raise ValueError(f"initial_data.center needs {n} coordinates, got {len(data.center)}")
        if isinstance(data, PlaneModulatedData) and len(data.wavevector) != n:
            raise ValueError(f"initial_data.wavevector needs {n} components, got {len(data.wavevector)}")
        if kind in EVOLUTION_EXPERIMENTS and self.time is None:
            raise ValueError(f"time section is required for experiment {kind.value}")

        needs_ground_state = (
            kind in (ExperimentKind.BLOWUP_SCAN, ExperimentKind.MASS_THRESHOLD, ExperimentKind.GROUND_STATE)
            or isinstance(data, GroundStateRescaledData)
        )
        if needs_ground_state:
            if not 1.0 < physics.alpha <= 2.0:
                raise ValueError(f"physics.alpha must lie in (1, 2] for a ground state, got {physics.alpha}")
            if not physics.gamma < 2.0 * physics.alpha:
                raise ValueError(f"physics.gamma must be below 2*alpha for a ground state, got {physics.gamma}")
        if kind in (ExperimentKind.BLOWUP_SCAN, ExperimentKind.MASS_THRESHOLD):
            if physics.gamma != physics.alpha:
                raise ValueError(f"{kind.value} needs physics.gamma == physics.alpha (mass-critical)")
            if physics.lam != -1:
                raise ValueError(f"{kind.value} needs physics.lam = -1 (focusing)")
            if not physics.mass > 0:
                raise ValueError(f"{kind.value} needs physics.mass > 0")
            if kind == ExperimentKind.BLOWUP_SCAN and not self.sweep.mass_factors:
                raise ValueError("sweep.mass_factors must not be empty")
        if kind in (ExperimentKind.LIMIT_M_TO_ZERO, ExperimentKind.LIMIT_M_TO_INFINITY):
            masses = np.asarray(self.sweep.masses, dtype=float)
            if masses.size < 2 or np.any(masses <= 0):
                raise ValueError("sweep.masses needs at least two positive masses")
            steps = np.diff(masses)
            if kind == ExperimentKind.LIMIT_M_TO_INFINITY and np.any(steps <= 0):
                raise ValueError("sweep.masses must be strictly increasing for limit_m_to_infinity")
            if kind == ExperimentKind.LIMIT_M_TO_ZERO and np.any(steps >= 0):
                raise ValueError("sweep.masses must be strictly decreasing for limit_m_to_zero")
        if kind == ExperimentKind.INEQUALITIES and n not in (2, 3):
            raise ValueError(f"inequalities run on grid.dim 2 or 3, got {n}")
        return self

    def config_hash(self) -> str:
        """sha256 of the canonical JSON form; identical configs hash identically."""
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode()).hexdigest()

    @property
    def run_id(self) -> str:
        return f"{self.experiment.value}-{self.config_hash()[:12]}"

    @property
    def comparison_index(self) -> float:
        s = self.sweep.sobolev_s
        return 0.5 * self.physics.gamma if s is None else s


class RunManifest(BaseModel):
    """Record of one run and every file it emitted."""
    model_config = ConfigDict(ser_json_inf_nan="constants")

    run_id: str
    experiment: ExperimentKind
    config_hash: str
    code_version: str = FHNLS_VERSION
    started_at: datetime
    finished_at: Optional[datetime] = None
    status: RunStatus = RunStatus.COMPLETED
    passed: Optional[bool] = Field(default=None, description="Experiment-level verdict where one is defined")
    outputs: List[str] = Field(default_factory=list)
    metrics: Dict[str, Any] = Field(default_factory=dict)
    error_message: Optional[str] = None

    @property
    def exit_code(self) -> int:
        if self.status == RunStatus.COMPLETED and self.passed is not False:
            return 0
        return 1
