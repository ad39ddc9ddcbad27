"""
Ground state models.
"""

from dataclasses import dataclass, field
from typing import List, Optional

from .spectral_models import ComplexField


@dataclass
class GroundStateResult:
    """Solution Q of |D|^alpha Q - (|x|^-gamma * |Q|^2) Q = -Q.

    kinetic is ||Q||^2 in H_dot^{alpha/2}, potential_magnitude is |V_1(Q)| and
    mass is ||Q||^2. pairing_defect and pohozaev_defect are the relative defects
    of the two integral identities the exact solution satisfies.
    """
    Q: ComplexField
    alpha: float
    gamma: float
    residual: float
    mass: float
    quotient_value: float
    iterations: int
    polish_iterations: int = 0
    converged: bool = False
    kinetic: float = 0.0
    potential_magnitude: float = 0.0
    pairing_defect: float = 0.0
    pohozaev_defect: float = 0.0
    quotient_history: List[float] = field(default_factory=list, repr=False)
    message: str = ""

    @property
    def l2_norm(self) -> float:
        return self.mass ** 0.5

    @property
    def is_mass_critical(self) -> bool:
        return abs(self.gamma - self.alpha) < 1e-12

    @property
    def critical_quotient_gap(self) -> Optional[float]:
        """|W(Q) - 2||Q||^2| / (2||Q||^2) in the mass-critical case."""
        if not self.is_mass_critical or self.mass == 0:
            return None
        return abs(self.quotient_value - 2.0 * self.mass) / (2.0 * self.mass)
