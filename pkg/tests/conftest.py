"""
Pytest configuration and fixtures for the fhnls tests.
"""

import pytest
import numpy as np

# Add the project root to the path for imports
import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.models.hartree_models import PotentialSpec
from src.models.spectral_models import ComplexField, Grid, Space
from src.services.hartree_service import build_kernel


@pytest.fixture
def grid_1d():
    """1D grid on [-10, 10) with 64 points."""
    return Grid(dim=1, points_per_axis=64, half_length=10.0)


@pytest.fixture
def grid_2d():
    """2D grid on [-8, 8)^2 with 32 points per axis."""
    return Grid(dim=2, points_per_axis=32, half_length=8.0)


def gaussian(grid: Grid, width: float = 1.0, amplitude: float = 1.0, chirp: float = 0.0) -> ComplexField:
    r2 = grid.radius_squared
    values = amplitude * np.exp(-0.5 * r2 / width ** 2) * np.exp(1j * chirp * r2)
    return ComplexField(grid, values, Space.PHYSICAL)


def seeded_field(grid: Grid, seed: int, width: float = 1.5) -> ComplexField:
    """Smooth complex field: random low modes under a Gaussian window."""
    rng = np.random.default_rng(seed)
    carrier = np.zeros(grid.shape, dtype=np.complex128)
    for _ in range(4):
        k = rng.uniform(-1.5, 1.5, size=grid.dim)
        c = rng.normal() + 1j * rng.normal()
        carrier += c * np.exp(1j * sum(kj * x for kj, x in zip(k, grid.coordinates)))
    return ComplexField(grid, carrier * np.exp(-0.5 * grid.radius_squared / width ** 2), Space.PHYSICAL)


@pytest.fixture
def gaussian_1d(grid_1d):
    return gaussian(grid_1d)


@pytest.fixture
def chirped_1d(grid_1d):
    return gaussian(grid_1d, width=1.2, chirp=0.3)


@pytest.fixture
def gaussian_2d(grid_2d):
    return gaussian(grid_2d)


@pytest.fixture
def kernel_1d(grid_1d):
    """Defocusing |x|^-1/2 kernel, psi = 1."""
    return build_kernel(grid_1d, PotentialSpec(gamma=0.5, lam=1))


@pytest.fixture
def focusing_kernel_1d(grid_1d):
    return build_kernel(grid_1d, PotentialSpec(gamma=0.5, lam=-1))


@pytest.fixture
def zero_kernel_1d(grid_1d):
    """psi = 0, so the nonlinearity vanishes."""
    return build_kernel(grid_1d, PotentialSpec(gamma=0.5, lam=1, psi_constant=0.0))


@pytest.fixture
def kernel_2d(grid_2d):
    return build_kernel(grid_2d, PotentialSpec(gamma=1.0, lam=1))
