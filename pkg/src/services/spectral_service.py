"""
Spectral substrate - grids, Fourier transforms under the continuum convention,
Fourier multipliers and Sobolev norms.

The forward transform approximates  u_hat(xi) = int exp(-i x.xi) u(x) dx  and the
inverse carries (2 pi)^-n, so Parseval reads
    ||u||^2 = (2 pi)^-n int |u_hat|^2 dxi.
"""

from typing import List, Optional, Sequence

import numpy as np
from scipy import fft as sfft
from loguru import logger

from ..consts import FFT_WORKERS
from ..models.errors import GridMismatchError
from ..models.spectral_models import (
    ComplexField, DispersionSymbol, Grid, SobolevVariant, Space, SymbolKind
)


def build_grid(dim: int, points_per_axis: int, half_length: float) -> Grid:
    """Build a periodic grid on [-L, L)^n."""
    grid = Grid(dim=dim, points_per_axis=points_per_axis, half_length=float(half_length))
    logger.debug(
        f"Built grid n={dim}, N={points_per_axis}, L={half_length}, spacing={grid.spacing:.6g}"
    )
    return grid


def check_same_grid(*grids: Grid) -> None:
    first = grids[0]
    for other in grids[1:]:
        if other != first:
            raise GridMismatchError(f"grid mismatch: {first} vs {other}")


# Raw array kernels. These skip the space-flag bookkeeping and are what the
# time steppers call in their inner loops.

def fft_values(values: np.ndarray) -> np.ndarray:
    return sfft.fftn(values, workers=FFT_WORKERS)


def ifft_values(values: np.ndarray) -> np.ndarray:
    return sfft.ifftn(values, workers=FFT_WORKERS)


def apply_multiplier(values: np.ndarray, multiplier: np.ndarray) -> np.ndarray:
    """inverse(multiplier * forward(values)); the convention factors cancel."""
    return ifft_values(multiplier * fft_values(values))


def forward_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    return grid.cell_volume * grid.shift_phase * fft_values(values)


def inverse_values(hat: np.ndarray, grid: Grid) -> np.ndarray:
    return ifft_values(grid.shift_phase * hat) / grid.cell_volume


def frequency_integral(density: np.ndarray, grid: Grid) -> float:
    """(2 pi)^-n times the frequency-lattice quadrature of a real density."""
    return float(np.sum(density)) * grid.frequency_cell_volume / (2.0 * np.pi) ** grid.dim


def spectral_power(values: np.ndarray, grid: Grid) -> np.ndarray:
    """|u_hat|^2 under the continuum convention."""
    return np.abs(fft_values(values)) ** 2 * grid.cell_volume ** 2


def transform(field: ComplexField) -> ComplexField:
    """Forward transform; physical -> frequency."""
    if field.space != Space.PHYSICAL:
        raise TypeError("transform expects a physical-space field")
    return ComplexField(field.grid, forward_values(field.values, field.grid), Space.FREQUENCY)


def inverse_transform(field: ComplexField) -> ComplexField:
    """Inverse transform; frequency -> physical."""
    if field.space != Space.FREQUENCY:
        raise TypeError("inverse_transform expects a frequency-space field")
    return ComplexField(field.grid, inverse_values(field.values, field.grid), Space.PHYSICAL)


def _as_physical(field: ComplexField) -> ComplexField:
    return inverse_transform(field) if field.space == Space.FREQUENCY else field


def _symbol_power(base_squared: np.ndarray, s: float) -> np.ndarray:
    """base^s for base = sqrt(base_squared), with the zero-frequency convention.

    At base 0 the value is 1 for s = 0 and 0 otherwise; for s < 0 this restricts
    the operator to the mean-zero part.
    """
    out = np.zeros_like(base_squared, dtype=float)
    positive = base_squared > 0
    out[positive] = base_squared[positive] ** (0.5 * s)
    if s == 0:
        out[~positive] = 1.0
    return out


def relativistic_symbol(grid: Grid, mass: float, s: float) -> DispersionSymbol:
    """(m^2 + |xi|^2)^(s/2)."""
    if mass < 0:
        raise ValueError(f"mass must be nonnegative, got {mass}")
    multiplier = _symbol_power(mass ** 2 + grid.xi_squared, s)
    return DispersionSymbol(SymbolKind.RELATIVISTIC, grid, float(mass), float(s), multiplier)


def homogeneous_symbol(grid: Grid, s: float) -> DispersionSymbol:
    """|xi|^s; the xi = 0 multiplier is 0 for s != 0."""
    multiplier = _symbol_power(grid.xi_squared, s)
    return DispersionSymbol(SymbolKind.HOMOGENEOUS, grid, 0.0, float(s), multiplier)


def shifted_relativistic_symbol(grid: Grid, mass: float, alpha: float) -> DispersionSymbol:
    """(m^2 + |xi|^2)^(alpha/2) - m^alpha, evaluated without cancellation."""
    if mass < 0:
        raise ValueError(f"mass must be nonnegative, got {mass}")
    if mass == 0:
        multiplier = _symbol_power(grid.xi_squared, alpha)
    else:
        multiplier = mass ** alpha * np.expm1(0.5 * alpha * np.log1p(grid.xi_squared / mass ** 2))
    return DispersionSymbol(
        SymbolKind.SHIFTED_RELATIVISTIC, grid, float(mass), float(alpha), multiplier
    )


def nonrelativistic_symbol(grid: Grid, mass: float, alpha: float) -> DispersionSymbol:
    """alpha / (2 m^(2-alpha)) |xi|^2, the large-mass limit of the shifted symbol."""
    if not mass > 0:
        raise ValueError(f"nonrelativistic symbol needs a positive mass, got {mass}")
    coefficient = alpha / (2.0 * mass ** (2.0 - alpha))
    return DispersionSymbol(
        SymbolKind.NONRELATIVISTIC, grid, float(mass), float(alpha), coefficient * grid.xi_squared
    )


def build_symbol(grid: Grid, kind: SymbolKind, mass: float, exponent: float) -> DispersionSymbol:
    kind = SymbolKind(kind)
    if kind == SymbolKind.RELATIVISTIC:
        return relativistic_symbol(grid, mass, exponent)
    if kind == SymbolKind.HOMOGENEOUS:
        return homogeneous_symbol(grid, exponent)
    if kind == SymbolKind.SHIFTED_RELATIVISTIC:
        return shifted_relativistic_symbol(grid, mass, exponent)
    return nonrelativistic_symbol(grid, mass, exponent)


def apply_symbol(field: ComplexField, symbol: DispersionSymbol) -> ComplexField:
    """inverse_transform(multiplier * transform(field)), returned in physical space."""
    check_same_grid(field.grid, symbol.grid)
    physical = _as_physical(field)
    return ComplexField(
        field.grid, apply_multiplier(physical.values, symbol.multiplier), Space.PHYSICAL
    )


def sobolev_weight(
    grid: Grid, s: float, variant: SobolevVariant, mass: Optional[float] = None
) -> np.ndarray:
    """Squared Sobolev weight w(xi)^2 over the frequency lattice."""
    variant = SobolevVariant(variant)
    if variant == SobolevVariant.HOMOGENEOUS:
        return _symbol_power(grid.xi_squared, 2.0 * s)
    if variant == SobolevVariant.INHOMOGENEOUS:
        return (1.0 + grid.xi_squared) ** s
    if mass is None:
        raise ValueError("massive Sobolev norm requires a mass")
    return _symbol_power(mass ** 2 + grid.xi_squared, 2.0 * s)


def sobolev_norm_values(
    values: np.ndarray,
    grid: Grid,
    s: float,
    variant: SobolevVariant = SobolevVariant.INHOMOGENEOUS,
    mass: Optional[float] = None,
) -> float:
    weight = sobolev_weight(grid, s, variant, mass)
    return float(np.sqrt(frequency_integral(weight * spectral_power(values, grid), grid)))


def sobolev_norm(
    field: ComplexField,
    s: float,
    variant: SobolevVariant = SobolevVariant.INHOMOGENEOUS,
    mass: Optional[float] = None,
) -> float:
    """||u|| with weight |xi|^s, (1+|xi|^2)^(s/2) or (m^2+|xi|^2)^(s/2)."""
    physical = _as_physical(field)
    return sobolev_norm_values(physical.values, field.grid, s, variant, mass)


def l2_norm_values(values: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(np.sum(np.abs(values) ** 2) * grid.cell_volume))


def l2_norm(field: ComplexField) -> float:
    return l2_norm_values(_as_physical(field).values, field.grid)


def mass_values(values: np.ndarray, grid: Grid) -> float:
    return float(np.sum(np.abs(values) ** 2) * grid.cell_volume)


def inner_product(u: ComplexField, v: ComplexField) -> complex:
    """<u, v> = int conj(u) v dx."""
    check_same_grid(u.grid, v.grid)
    return complex(np.vdot(_as_physical(u).values, _as_physical(v).values) * u.grid.cell_volume)


def lebesgue_norm_values(values: np.ndarray, grid: Grid, p: float) -> float:
    """L^p norm by grid quadrature; p = inf is the grid maximum."""
    magnitude = np.abs(values)
    if np.isinf(p):
        return float(np.max(magnitude))
    if p <= 0:
        raise ValueError(f"Lebesgue exponent must be positive, got {p}")
    return float((np.sum(magnitude ** p) * grid.cell_volume) ** (1.0 / p))


def gradient_values(values: np.ndarray, grid: Grid) -> List[np.ndarray]:
    """Spectral partial derivatives, Nyquist mode dropped."""
    hat = fft_values(values)
    return [ifft_values(1j * k * hat) for k in grid.derivative_wavenumbers]


def interpolate_to_grid(field: ComplexField, target: Grid) -> ComplexField:
    """Trigonometric interpolation onto a grid with the same box and more points."""
    grid = field.grid
    if target.half_length != grid.half_length or target.dim != grid.dim:
        raise GridMismatchError("interpolation needs the same box and dimension")
    if target.points_per_axis < grid.points_per_axis:
        raise ValueError("target grid must not be coarser than the source grid")
    hat = forward_values(_as_physical(field).values, grid)
    padded = np.zeros(target.shape, dtype=np.complex128)
    source_index = _embedding_index(grid.frequency_indices, target.points_per_axis)
    padded[np.ix_(*([source_index] * grid.dim))] = hat
    return ComplexField(target, inverse_values(padded, target), Space.PHYSICAL)


def _embedding_index(modes: Sequence[int], points: int) -> np.ndarray:
    return np.asarray([k % points for k in modes])


def quadratic_form_values(values: np.ndarray, grid: Grid, multiplier: np.ndarray) -> float:
    """<u, sigma(D) u> = (2 pi)^-n int sigma |u_hat|^2 dxi for a real multiplier."""
    return frequency_integral(multiplier * spectral_power(values, grid), grid)


def quadratic_form_hat(hat_fft: np.ndarray, grid: Grid, multiplier: np.ndarray) -> float:
    """quadratic_form_values from an already computed fftn of the samples."""
    power = np.abs(hat_fft) ** 2 * grid.cell_volume ** 2
    return frequency_integral(multiplier * power, grid)
