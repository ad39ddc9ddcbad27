"""
Hartree potential models - the radial profile psi, the exponent gamma and the
precomputed convolution kernel psi(x)/|x|^gamma.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from .spectral_models import Grid


@dataclass
class PotentialSpec:
    """Parameters of F(u) = lam * (psi/|x|^gamma * |u|^2) u.

    psi is either the constant psi_constant or a radial table (psi_radii,
    psi_values) interpolated linearly and held constant past the last radius.
    psi_derivative, when given, tabulates psi' on the same radii.
    """
    gamma: float
    lam: int = 1
    psi_constant: float = 1.0
    psi_radii: Optional[np.ndarray] = None
    psi_values: Optional[np.ndarray] = None
    psi_derivative: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.lam not in (1, -1):
            raise ValueError(f"lam must be +1 or -1, got {self.lam}")
        if (self.psi_radii is None) != (self.psi_values is None):
            raise ValueError("psi_radii and psi_values must be given together")
        if self.psi_radii is None:
            if self.psi_constant < 0:
                raise ValueError(f"psi must be nonnegative, got constant {self.psi_constant}")
            return
        self.psi_radii = np.asarray(self.psi_radii, dtype=float)
        self.psi_values = np.asarray(self.psi_values, dtype=float)
        if self.psi_radii.ndim != 1 or self.psi_radii.shape != self.psi_values.shape:
            raise ValueError("psi table columns must be one-dimensional and equally long")
        if self.psi_radii.size < 2 or self.psi_radii[0] != 0.0:
            raise ValueError("psi table radii must start at 0 and have at least two rows")
        if np.any(np.diff(self.psi_radii) <= 0):
            raise ValueError("psi table radii must be strictly increasing")
        if np.any(self.psi_values < 0) or not np.all(np.isfinite(self.psi_values)):
            raise ValueError("psi table values must be finite and nonnegative")
        if self.psi_derivative is not None:
            self.psi_derivative = np.asarray(self.psi_derivative, dtype=float)
            if self.psi_derivative.shape != self.psi_radii.shape:
                raise ValueError("psi derivative column must match the radii column")

    @property
    def is_constant(self) -> bool:
        return self.psi_radii is None

    @property
    def psi_sup(self) -> float:
        """||psi||_inf."""
        if self.is_constant:
            return float(self.psi_constant)
        return float(np.max(self.psi_values))

    def psi(self, radius: np.ndarray) -> np.ndarray:
        radius = np.asarray(radius, dtype=float)
        if self.is_constant:
            return np.full_like(radius, self.psi_constant)
        return np.interp(radius, self.psi_radii, self.psi_values)

    def psi_prime(self, radius: np.ndarray) -> np.ndarray:
        """psi'(rho); zero for constant psi and past the end of the table."""
        radius = np.asarray(radius, dtype=float)
        if self.is_constant:
            return np.zeros_like(radius)
        if self.psi_derivative is not None:
            return np.interp(radius, self.psi_radii, self.psi_derivative, right=0.0)
        slopes = np.diff(self.psi_values) / np.diff(self.psi_radii)
        cell = np.clip(np.searchsorted(self.psi_radii, radius, side='right') - 1, 0, slopes.size - 1)
        return np.where(radius > self.psi_radii[-1], 0.0, slopes[cell])

    @classmethod
    def from_csv(cls, path: Union[str, Path], gamma: float, lam: int = 1) -> 'PotentialSpec':
        """Load a (rho, psi[, psi']) table; the header row is optional."""
        table = pd.read_csv(path, header=None, comment='#')
        if not np.issubdtype(table.iloc[:, 0].dtype, np.number):
            table = pd.read_csv(path, comment='#')
        table = table.apply(pd.to_numeric)
        if table.shape[1] < 2:
            raise ValueError(f"psi table {path} needs at least two columns")
        derivative = table.iloc[:, 2].to_numpy() if table.shape[1] > 2 else None
        return cls(
            gamma=gamma,
            lam=lam,
            psi_radii=table.iloc[:, 0].to_numpy(),
            psi_values=table.iloc[:, 1].to_numpy(),
            psi_derivative=derivative,
        )


@dataclass(frozen=True, eq=False)
class HartreeKernel:
    """Sampled kernel psi(|x|)/|x|^gamma on the 2x zero-padded lattice.

    padded_multiplier already carries the cell volume, so convolving a density
    is ifftn(padded_multiplier * fftn(padded density)) cropped to the grid.
    """
    grid: Grid
    spec: PotentialSpec
    padded_multiplier: np.ndarray = field(repr=False)
    singular_cell_value: float = 0.0

    def __post_init__(self):
        self.padded_multiplier.setflags(write=False)

    @property
    def padded_shape(self):
        return tuple(2 * n for n in self.grid.shape)

    @property
    def is_trivial(self) -> bool:
        """True when psi vanishes identically, so F(u) = 0."""
        return self.spec.psi_sup == 0.0
