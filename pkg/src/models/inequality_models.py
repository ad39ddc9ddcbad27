"""
Inequality lab models - test-function families and ratio reports.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..consts import INEQUALITY_DEFAULT_SAMPLES
from .spectral_models import ComplexField, Grid, Space

# Seeds at or above this value select the deterministic adversarial profiles.
ADVERSARIAL_SEED_BASE = 1_000_000


class InequalityId(str, Enum):
    HARDY = "hardy"
    KGAMMA_BOUND = "kgamma_bound"
    STEIN_WEISS = "stein_weiss"
    LEIBNIZ = "leibniz"
    WEIGHTED_CONVOLUTION = "weighted_convolution"
    COMMUTATOR = "commutator"


class AdversarialProfile(str, Enum):
    OFF_CENTER_BUMP = "off_center_bump"
    CHIRP = "chirp"
    TWO_BUMPS = "two_bumps"
    NARROW_BUMP = "narrow_bump"
    MODULATED_GAUSSIAN = "modulated_gaussian"


class GridSpec(BaseModel):
    """(n, N, L) of the grid a report was computed on."""
    dim: int = Field(..., ge=1, le=3, description="Spatial dimension n")
    points_per_axis: int = Field(..., description="Samples per axis N")
    half_length: float = Field(..., gt=0, description="Half box length L")

    @classmethod
    def of(cls, grid: Grid) -> 'GridSpec':
        return cls(dim=grid.dim, points_per_axis=grid.points_per_axis, half_length=grid.half_length)


class RatioReport(BaseModel):
    """Worst LHS/RHS ratio of one inequality over a seeded family."""
    model_config = ConfigDict(ser_json_inf_nan="constants")

    inequality_id: InequalityId = Field(..., description="Which inequality was checked")
    params: Dict[str, float] = Field(default_factory=dict, description="Exponents and parameters")
    samples: int = Field(..., ge=1, description="Number of family members evaluated")
    worst_ratio: float = Field(..., description="max LHS/RHS over the family")
    worst_case_seed: int = Field(..., description="Seed of the maximizing member")
    grid_spec: GridSpec = Field(..., description="Grid the ratios were computed on")
    refinement_ratio: Optional[float] = Field(
        default=None, description="worst_ratio on the 2x refined grid divided by worst_ratio"
    )
    symmetry_defect: Optional[float] = Field(
        default=None, description="Relative change of the worst ratio under the inequality's symmetry"
    )
    sweep: Dict[str, float] = Field(default_factory=dict, description="Per-parameter worst ratios")
    gated: bool = Field(default=True, description="False for endpoint cases that are reported only")
    notes: List[str] = Field(default_factory=list)

    @property
    def is_finite(self) -> bool:
        return bool(np.isfinite(self.worst_ratio) and self.worst_ratio > 0)


@dataclass
class FieldFamily:
    """Seeded smooth test functions, defined in the continuum.

    Random members are band-limited trigonometric sums under a Gaussian window
    with modes up to max_wavenumber; the same seed gives the same function on
    any grid over the same box, so refinement studies compare like with like.
    With radial=True the members are chirped radial profiles instead.
    """
    dim: int
    half_length: float
    max_wavenumber: float
    samples: int = INEQUALITY_DEFAULT_SAMPLES
    first_seed: int = 0
    modes: int = 6
    include_adversarial: bool = True
    radial: bool = False

    @classmethod
    def for_grid(cls, grid: Grid, **kwargs) -> 'FieldFamily':
        """Family with the wavenumber cutoff at a quarter of the grid's modes."""
        cutoff = 0.25 * grid.points_per_axis * grid.frequency_step
        return cls(dim=grid.dim, half_length=grid.half_length, max_wavenumber=cutoff, **kwargs)

    def seeds(self) -> List[int]:
        seeds = list(range(self.first_seed, self.first_seed + self.samples))
        if self.include_adversarial and not self.radial:
            seeds += [ADVERSARIAL_SEED_BASE + i for i in range(len(AdversarialProfile))]
        return seeds

    def describe(self, seed: int) -> str:
        if seed >= ADVERSARIAL_SEED_BASE:
            return list(AdversarialProfile)[seed - ADVERSARIAL_SEED_BASE].value
        return f"{'radial' if self.radial else 'random'}[{seed}]"

    def sample(self, seed: int, grid: Grid, stream: int = 0) -> ComplexField:
        if grid.dim != self.dim or grid.half_length != self.half_length:
            raise ValueError("family and grid must share dimension and box")
        if seed >= ADVERSARIAL_SEED_BASE:
            values = self._adversarial(list(AdversarialProfile)[seed - ADVERSARIAL_SEED_BASE], grid, stream)
        elif self.radial:
            values = self._radial(seed, grid, stream)
        else:
            values = self._random(seed, grid, stream)
        return ComplexField(grid, values, Space.PHYSICAL)

    def _window(self, grid: Grid, center: np.ndarray, width: float) -> np.ndarray:
        offset = sum((x - c) ** 2 for x, c in zip(grid.coordinates, center))
        return np.exp(-0.5 * offset / width ** 2)

    def _random(self, seed: int, grid: Grid, stream: int) -> np.ndarray:
        rng = np.random.default_rng([seed, stream])
        L = self.half_length
        center = rng.uniform(-0.2 * L, 0.2 * L, size=self.dim)
        width = rng.uniform(L / 14.0, L / 9.0)
        wavevectors = rng.uniform(-self.max_wavenumber, self.max_wavenumber, size=(self.modes, self.dim))
        amplitudes = rng.normal(size=self.modes) + 1j * rng.normal(size=self.modes)
        carrier = np.zeros(grid.shape, dtype=np.complex128)
        for k, c in zip(wavevectors, amplitudes):
            carrier += c * np.exp(1j * sum(kj * x for kj, x in zip(k, grid.coordinates)))
        return carrier * self._window(grid, center, width)

    def _radial(self, seed: int, grid: Grid, stream: int) -> np.ndarray:
        rng = np.random.default_rng([seed, stream])
        L = self.half_length
        widths = rng.uniform(L / 16.0, L / 8.0, size=3)
        weights = rng.uniform(0.2, 1.0, size=3)
        chirp = rng.uniform(0.2, 1.0) * self.max_wavenumber / L
        profile = sum(w * np.exp(-0.5 * grid.radius_squared / s ** 2) for w, s in zip(weights, widths))
        return profile * np.exp(1j * chirp * grid.radius_squared)

    def _adversarial(self, profile: AdversarialProfile, grid: Grid, stream: int) -> np.ndarray:
        L = self.half_length
        unit = np.zeros(self.dim)
        unit[0] = 1.0
        width = L / 12.0
        sign = -1.0 if stream else 1.0
        if profile == AdversarialProfile.OFF_CENTER_BUMP:
            return self._window(grid, sign * 0.3 * L * unit, width).astype(np.complex128)
        if profile == AdversarialProfile.CHIRP:
            chirp = 0.5 * self.max_wavenumber / L
            return self._window(grid, np.zeros(self.dim), width) * np.exp(1j * chirp * grid.radius_squared)
        if profile == AdversarialProfile.TWO_BUMPS:
            return (
                self._window(grid, 0.25 * L * unit, width) + self._window(grid, -0.25 * L * unit, width)
            ).astype(np.complex128)
        if profile == AdversarialProfile.NARROW_BUMP:
            narrow = 3.0 / self.max_wavenumber
            return self._window(grid, sign * 0.1 * L * unit, narrow).astype(np.complex128)
        wave = 0.5 * self.max_wavenumber
        return self._window(grid, np.zeros(self.dim), width) * np.exp(1j * wave * grid.coordinates[0])


@dataclass
class HolderSplit:
    """Exponents of the fractional Leibniz rule: 1/r = 1/r1 + 1/q2 = 1/q1 + 1/r2."""
    r: float
    r1: float
    q2: float
    q1: float
    r2: float

    def __post_init__(self):
        for name in ('r', 'r1', 'q2', 'q1', 'r2'):
            if not getattr(self, name) >= 1:
                raise ValueError(f"Leibniz exponent {name} must be at least 1, got {getattr(self, name)}")
        if not 1 < self.r < np.inf:
            raise ValueError(f"Leibniz exponent r must lie in (1, inf), got {self.r}")
        inverse = lambda p: 0.0 if np.isinf(p) else 1.0 / p
        if not np.isclose(inverse(self.r), inverse(self.r1) + inverse(self.q2)):
            raise ValueError("incompatible Leibniz exponents: 1/r != 1/r1 + 1/q2")
        if not np.isclose(inverse(self.r), inverse(self.q1) + inverse(self.r2)):
            raise ValueError("incompatible Leibniz exponents: 1/r != 1/q1 + 1/r2")

    def as_params(self) -> Dict[str, float]:
        return {'r': self.r, 'r1': self.r1, 'q2': self.q2, 'q1': self.q1, 'r2': self.r2}

    @classmethod
    def symmetric(cls, r: float) -> 'HolderSplit':
        return cls(r=r, r1=2.0 * r, q2=2.0 * r, q1=2.0 * r, r2=2.0 * r)

