"""
Data models for the spectral substrate: grids, sampled fields and Fourier multipliers.
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Tuple

import numpy as np

from ..consts import MIN_POINTS_PER_AXIS, SUPPORTED_DIMENSIONS


class Space(str, Enum):
    """Representation a field is stored in."""
    PHYSICAL = "physical"
    FREQUENCY = "frequency"


class SymbolKind(str, Enum):
    """Families of dispersion multipliers."""
    RELATIVISTIC = "relativistic"
    HOMOGENEOUS = "homogeneous"
    SHIFTED_RELATIVISTIC = "shifted_relativistic"
    NONRELATIVISTIC = "nonrelativistic"


class SobolevVariant(str, Enum):
    """Weights accepted by sobolev_norm."""
    HOMOGENEOUS = "homogeneous"
    INHOMOGENEOUS = "inhomogeneous"
    MASSIVE = "massive"


@dataclass(frozen=True)
class Grid:
    """Periodic box [-L, L)^n sampled with N points per axis.

    Physical arrays are stored in natural order starting at x = -L; frequency
    arrays are stored in FFT order, so the wavenumber of index k is pi*k/L with
    k taken from fftfreq.
    """
    dim: int
    points_per_axis: int
    half_length: float

    def __post_init__(self):
        if self.dim not in SUPPORTED_DIMENSIONS:
            raise ValueError(f"dim must be one of {SUPPORTED_DIMENSIONS}, got {self.dim}")
        if int(self.points_per_axis) != self.points_per_axis or self.points_per_axis % 2:
            raise ValueError(f"points_per_axis must be even, got {self.points_per_axis}")
        if self.points_per_axis < MIN_POINTS_PER_AXIS:
            raise ValueError(
                f"points_per_axis must be at least {MIN_POINTS_PER_AXIS}, got {self.points_per_axis}"
            )
        if not self.half_length > 0:
            raise ValueError(f"half_length must be positive, got {self.half_length}")

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.points_per_axis ** self.dim

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / self.points_per_axis

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    @property
    def frequency_step(self) -> float:
        return np.pi / self.half_length

    @property
    def frequency_cell_volume(self) -> float:
        return self.frequency_step ** self.dim

    @property
    def box_volume(self) -> float:
        return (2.0 * self.half_length) ** self.dim

    @cached_property
    def axis(self) -> np.ndarray:
        """Physical coordinates along one axis."""
        return -self.half_length + self.spacing * np.arange(self.points_per_axis)

    @cached_property
    def frequency_indices(self) -> np.ndarray:
        """Integer mode numbers along one axis, FFT order."""
        n = self.points_per_axis
        return np.concatenate([np.arange(0, n // 2), np.arange(-n // 2, 0)])

    @cached_property
    def axis_wavenumbers(self) -> np.ndarray:
        """Wavenumbers along one axis, FFT order."""
        return self.frequency_step * self.frequency_indices

    @cached_property
    def frequencies(self) -> np.ndarray:
        """Sorted frequency lattice along one axis, from -N/2 to N/2-1 steps."""
        return np.sort(self.axis_wavenumbers)

    @cached_property
    def coordinates(self) -> Tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.axis] * self.dim), indexing='ij'))

    @cached_property
    def wavenumbers(self) -> Tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.axis_wavenumbers] * self.dim), indexing='ij'))

    @cached_property
    def derivative_wavenumbers(self) -> Tuple[np.ndarray, ...]:
        """Wavenumbers with the unpaired Nyquist mode zeroed, for odd derivatives."""
        k = self.axis_wavenumbers.copy()
        k[self.points_per_axis // 2] = 0.0
        return tuple(np.meshgrid(*([k] * self.dim), indexing='ij'))

    @cached_property
    def radius_squared(self) -> np.ndarray:
        return sum(x ** 2 for x in self.coordinates)

    @cached_property
    def radius(self) -> np.ndarray:
        return np.sqrt(self.radius_squared)

    @cached_property
    def xi_squared(self) -> np.ndarray:
        return sum(k ** 2 for k in self.wavenumbers)

    @cached_property
    def xi_norm(self) -> np.ndarray:
        return np.sqrt(self.xi_squared)

    @cached_property
    def shift_phase(self) -> np.ndarray:
        """exp(i L xi) = (-1)^k, the phase from placing the first sample at -L."""
        signs = np.where(self.frequency_indices % 2 == 0, 1.0, -1.0)
        phase = signs
        for _ in range(self.dim - 1):
            phase = np.multiply.outer(phase, signs)
        return phase

    def refined(self, factor: int = 2) -> 'Grid':
        """Same box, factor times more points per axis."""
        return Grid(self.dim, self.points_per_axis * factor, self.half_length)

    def dilated(self, scale: float) -> 'Grid':
        """Same number of points, box shrunk by scale."""
        return Grid(self.dim, self.points_per_axis, self.half_length / scale)


@dataclass(eq=False)
class ComplexField:
    """Complex samples of a function on a grid, in physical or frequency space."""
    grid: Grid
    values: np.ndarray
    space: Space = Space.PHYSICAL

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid shape {self.grid.shape}"
            )

    def copy(self) -> 'ComplexField':
        return ComplexField(self.grid, self.values.copy(), self.space)

    def with_values(self, values: np.ndarray) -> 'ComplexField':
        return ComplexField(self.grid, values, self.space)

    def __mul__(self, scalar: complex) -> 'ComplexField':
        return ComplexField(self.grid, self.values * scalar, self.space)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class DispersionSymbol:
    """Real Fourier multiplier sigma(xi) cached over the grid's frequency lattice."""
    kind: SymbolKind
    grid: Grid
    mass: float
    exponent: float
    multiplier: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.multiplier.setflags(write=False)

    @property
    def label(self) -> str:
        return f"{self.kind.value}(m={self.mass:g}, s={self.exponent:g})"
