"""
Observable models - per-sample diagnostics, Strichartz accumulation and the
reports built from trajectories.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, NamedTuple, Optional

import numpy as np

from ..consts import OBSERVABLE_COLUMNS
from .spectral_models import ComplexField


class EnergyBreakdown(NamedTuple):
    kinetic: float
    potential: float
    energy: float


@dataclass
class ObservableRecord:
    """Diagnostics of u at one observation time."""
    t: float
    mass: float
    kinetic: float
    potential: float
    energy: float
    h_gamma_half: float
    dilation_virial: float
    weighted_virial: float
    moment2: float
    grad_moment: float
    extra: Dict[str, float] = field(default_factory=dict)

    def as_row(self) -> Dict[str, float]:
        row = {name: getattr(self, name) for name in OBSERVABLE_COLUMNS}
        row.update(self.extra)
        return row


@dataclass
class StrichartzAccumulator:
    """Running trapezoid integral of ||u(t)||^q with ||.|| the W^{s,r} norm.

    For q = inf the running maximum is kept instead.
    """
    q: float
    r: float
    sobolev_s: Optional[float] = None
    integral: float = 0.0
    last_t: Optional[float] = None
    last_value: Optional[float] = None
    samples: int = 0

    def __post_init__(self):
        if not self.q >= 1:
            raise ValueError(f"temporal exponent q must be at least 1, got {self.q}")
        if not self.r >= 1:
            raise ValueError(f"spatial exponent r must be at least 1, got {self.r}")


@dataclass
class VirialResidualReport:
    """Finite-difference checks of the two virial inequalities."""
    samples: int
    cadence: float
    energy: float
    max_dilation_residual: float
    fitted_constant: float
    max_concavity_residual: float
    psi_nonincreasing: bool = True
    dilation_rates: np.ndarray = field(default=None, repr=False)
    weighted_rates: np.ndarray = field(default=None, repr=False)
    weighted_curvatures: np.ndarray = field(default=None, repr=False)

    def dilation_bound_holds(self, tolerance: float) -> bool:
        """d/dt <u,Au> <= 2 alpha E(phi) + tolerance |E(phi)| at every interior sample."""
        return bool(self.max_dilation_residual <= tolerance * abs(self.energy))

    def concavity_bound_holds(self, tolerance: float) -> bool:
        """d^2/dt^2 <u,Mu> <= 4 alpha^2 E(phi) + tolerance |E(phi)| at every interior sample."""
        return bool(self.max_concavity_residual <= tolerance * abs(self.energy))


@dataclass
class ScatteringResult:
    """phi_plus and the defect ||u(t) - U(t) phi_plus||_{H^s} along a trajectory."""
    asymptotic_state: ComplexField
    horizon: float
    sobolev_s: float
    times: np.ndarray = field(repr=False)
    defects: np.ndarray = field(repr=False)

    @property
    def final_defect(self) -> float:
        return float(self.defects[-1]) if len(self.defects) else float('nan')


class Criticality(str, Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


@dataclass
class RegimeReport:
    """Position of (n, alpha, gamma) relative to the mass and energy critical lines."""
    dim: int
    alpha: float
    gamma: float
    mass_regime: Criticality
    energy_regime: Criticality
    critical_index: float
    sobolev_index: Optional[float] = None
    sobolev_regime: Optional[Criticality] = None
    notes: List[str] = field(default_factory=list)
