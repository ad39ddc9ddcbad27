"""
Evolution models - solver state, step control and run summaries.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional

import numpy as np

from ..consts import DEFAULT_BLOWUP_THRESHOLD, DEFAULT_OBSERVER_STRIDE
from .hartree_models import HartreeKernel
from .spectral_models import ComplexField, DispersionSymbol, Grid, Space


class EvolutionStatus(str, Enum):
    """How a run ended."""
    COMPLETED = "completed"
    BLOWUP = "blowup"
    STALLED_NEAR_SINGULARITY = "stalled_near_singularity"
    INSTABILITY = "instability"


class StepMode(str, Enum):
    FIXED = "fixed"
    ADAPTIVE = "adaptive"


@dataclass
class StepController:
    """Step size policy plus the blowup criterion.

    Blowup is declared when ||u||_{H^{gamma/2}} exceeds blowup_threshold times its
    initial value. observer_interval is in time units; None means
    DEFAULT_OBSERVER_STRIDE initial steps.
    """
    dt: float
    mode: StepMode = StepMode.FIXED
    energy_tol: Optional[float] = None
    dt_min: Optional[float] = None
    dt_max: Optional[float] = None
    blowup_threshold: float = DEFAULT_BLOWUP_THRESHOLD
    observer_interval: Optional[float] = None

    def __post_init__(self):
        self.mode = StepMode(self.mode)
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.blowup_threshold > 1:
            raise ValueError(f"blowup_threshold must exceed 1, got {self.blowup_threshold}")
        if self.observer_interval is not None and not self.observer_interval > 0:
            raise ValueError(f"observer_interval must be positive, got {self.observer_interval}")
        if self.mode == StepMode.ADAPTIVE:
            if self.energy_tol is None or not self.energy_tol > 0:
                raise ValueError("adaptive stepping requires a positive energy_tol")
            self.dt_min = self.dt_min if self.dt_min is not None else self.dt / 1024.0
            self.dt_max = self.dt_max if self.dt_max is not None else self.dt
            if not 0 < self.dt_min <= self.dt <= self.dt_max:
                raise ValueError(
                    f"adaptive stepping needs dt_min <= dt <= dt_max, got "
                    f"{self.dt_min}, {self.dt}, {self.dt_max}"
                )

    @classmethod
    def fixed(cls, dt: float, **kwargs) -> 'StepController':
        return cls(dt=dt, mode=StepMode.FIXED, **kwargs)

    @classmethod
    def adaptive(
        cls, dt: float, energy_tol: float, dt_min: Optional[float] = None,
        dt_max: Optional[float] = None, **kwargs
    ) -> 'StepController':
        return cls(
            dt=dt, mode=StepMode.ADAPTIVE, energy_tol=energy_tol,
            dt_min=dt_min, dt_max=dt_max, **kwargs
        )

    @property
    def is_adaptive(self) -> bool:
        return self.mode == StepMode.ADAPTIVE

    @property
    def cadence(self) -> float:
        if self.observer_interval is not None:
            return self.observer_interval
        return DEFAULT_OBSERVER_STRIDE * self.dt


@dataclass
class EvolutionState:
    """Solution u(t) of i u_t = sigma(D) u + F(u) together with its operators."""
    u: ComplexField
    t: float
    dt: float
    dispersion: DispersionSymbol
    kernel: HartreeKernel
    step_count: int = 0
    h_gamma_half: Optional[float] = None
    hdot_alpha_half: Optional[float] = None
    propagator_cache: Dict[float, np.ndarray] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.u.space != Space.PHYSICAL:
            raise TypeError("EvolutionState holds a physical-space field")

    @property
    def grid(self) -> Grid:
        return self.u.grid

    def snapshot(self) -> 'EvolutionSnapshot':
        values = self.u.values.copy()
        values.setflags(write=False)
        return EvolutionSnapshot(
            t=self.t, step_count=self.step_count, dt=self.dt, grid=self.grid, values=values
        )


@dataclass(frozen=True, eq=False)
class EvolutionSnapshot:
    """Read-only copy of the state handed to observers."""
    t: float
    step_count: int
    dt: float
    grid: Grid
    values: np.ndarray = field(repr=False)

    def to_field(self) -> ComplexField:
        return ComplexField(self.grid, self.values, Space.PHYSICAL)


@dataclass
class TrajectorySummary:
    """Outcome of evolve()."""
    status: EvolutionStatus
    final_state: EvolutionState
    t_end: float
    steps: int
    rejected_steps: int
    initial_norm: float
    final_norm: float
    peak_norm: float
    mass_initial: float
    mass_final: float
    energy_initial: float
    energy_final: float
    blowup_time: Optional[float] = None
    message: str = ""
    initial_hdot_norm: float = 0.0
    peak_hdot_norm: float = 0.0

    @property
    def hdot_growth(self) -> float:
        """Peak over initial ||u||_{H_dot^{alpha/2}}."""
        if self.initial_hdot_norm == 0:
            return float('inf') if self.peak_hdot_norm > 0 else 1.0
        return self.peak_hdot_norm / self.initial_hdot_norm

    @property
    def relative_mass_drift(self) -> float:
        if self.mass_initial == 0:
            return 0.0
        return abs(self.mass_final - self.mass_initial) / self.mass_initial

    @property
    def relative_energy_drift(self) -> float:
        scale = abs(self.energy_initial)
        if scale == 0:
            return abs(self.energy_final)
        return abs(self.energy_final - self.energy_initial) / scale


@dataclass
class CheckpointData:
    """Contents of a checkpoint file."""
    grid: Grid
    values: np.ndarray = field(repr=False)
    t: float = 0.0
    dt: float = 0.0
    mass: float = 0.0
    alpha: float = 0.0
    gamma: float = 0.0
    lam: int = 1

    def to_field(self) -> ComplexField:
        return ComplexField(self.grid, self.values, Space.PHYSICAL)
