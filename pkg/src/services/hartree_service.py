"""
Hartree service - kernel construction and evaluation of K_gamma(|u|^2),
F(u) = lam K_gamma(|u|^2) u and V(u) = (1/4) <F(u), u>.

Convolutions are linear (non-circular): the density is zero-padded to twice the
box per axis and the kernel is sampled at every lattice displacement that can
occur between two grid points.
"""

from typing import Callable, Optional

import numpy as np
from scipy import special
from loguru import logger

from ..consts import (
    KERNEL_SELF_CHECK_TOLERANCE, SINGULAR_FACE_NODES, SINGULAR_RADIAL_NODES
)
from ..models.hartree_models import HartreeKernel, PotentialSpec
from ..models.spectral_models import ComplexField, Grid, Space
from .spectral_service import check_same_grid, fft_values, ifft_values


def riesz_constant(dim: int, gamma: float) -> float:
    """c_{n,gamma} with  (|x|^-gamma)^ = c |xi|^(gamma-n)  under exp(-i x.xi)."""
    return float(
        2.0 ** (dim - gamma) * np.pi ** (dim / 2.0)
        * special.gamma((dim - gamma) / 2.0) / special.gamma(gamma / 2.0)
    )


def singular_cell_average(
    grid: Grid,
    gamma: float,
    profile: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> float:
    """Average of profile(|x|) |x|^-gamma over the lattice cell centred at 0.

    The cube is split into 2n pyramids with apex at the origin. In each one the
    radial factor t^(n-1-gamma) is integrated by Gauss-Jacobi and the face by a
    tensor Gauss-Legendre rule, so the singularity is handled exactly.
    """
    dim = grid.dim
    if not gamma < dim:
        raise ValueError(f"gamma must be below the dimension {dim}, got {gamma}")
    half = 0.5 * grid.spacing
    power = dim - 1.0 - gamma
    nodes, weights = special.roots_jacobi(SINGULAR_RADIAL_NODES, 0.0, power)
    t = 0.5 * (1.0 + nodes)
    t_weights = weights / 2.0 ** (power + 1.0)

    if dim == 1:
        face_radius = np.array([half])
        face_weights = np.array([1.0])
    else:
        y, w = special.roots_legendre(SINGULAR_FACE_NODES)
        mesh = np.meshgrid(*([y] * (dim - 1)), indexing='ij')
        face_radius = half * np.sqrt(1.0 + sum(c ** 2 for c in mesh)).ravel()
        face_weights = np.ones_like(mesh[0])
        for axis_weights in np.meshgrid(*([w] * (dim - 1)), indexing='ij'):
            face_weights = face_weights * axis_weights
        face_weights = face_weights.ravel()

    radii = np.outer(face_radius, t)
    psi = np.ones_like(radii) if profile is None else profile(radii)
    inner = psi @ t_weights
    total = 2 * dim * half ** dim * np.sum(face_weights * face_radius ** (-gamma) * inner)
    return float(total / grid.cell_volume)


def padded_displacement_radius(grid: Grid) -> np.ndarray:
    """|x - y| for every displacement on the 2N-per-axis lattice, FFT order."""
    n = grid.points_per_axis
    offsets = grid.spacing * np.concatenate([np.arange(0, n), np.arange(-n, 0)])
    mesh = np.meshgrid(*([offsets] * grid.dim), indexing='ij')
    return np.sqrt(sum(c ** 2 for c in mesh))


def _unused_displacements(grid: Grid) -> np.ndarray:
    """Mask of displacements with an index equal to -N on some axis."""
    n = grid.points_per_axis
    axis_mask = np.zeros(2 * n, dtype=bool)
    axis_mask[n] = True
    mesh = np.meshgrid(*([axis_mask] * grid.dim), indexing='ij')
    return np.logical_or.reduce(mesh)


def sample_kernel(grid: Grid, spec: PotentialSpec, gamma: Optional[float] = None) -> np.ndarray:
    """psi(|x|)/|x|^gamma on the padded lattice, with the origin cell averaged."""
    gamma = spec.gamma if gamma is None else gamma
    radius = padded_displacement_radius(grid)
    kernel = np.zeros_like(radius)
    nonzero = radius > 0
    kernel[nonzero] = spec.psi(radius[nonzero]) * radius[nonzero] ** (-gamma)
    origin = (0,) * grid.dim
    kernel[origin] = singular_cell_average(
        grid, gamma, None if spec.is_constant and spec.psi_constant == 1.0 else spec.psi
    )
    kernel[_unused_displacements(grid)] = 0.0
    return kernel


def build_kernel(grid: Grid, spec: PotentialSpec) -> HartreeKernel:
    """Sample psi/|x|^gamma on the padded lattice and precompute its transform."""
    if not spec.gamma < grid.dim:
        raise ValueError(f"gamma must be below the dimension {grid.dim}, got {spec.gamma}")
    kernel = sample_kernel(grid, spec)
    multiplier = grid.cell_volume * fft_values(kernel)
    result = HartreeKernel(
        grid=grid,
        spec=spec,
        padded_multiplier=multiplier,
        singular_cell_value=float(kernel[(0,) * grid.dim]),
    )
    logger.debug(
        f"Built Hartree kernel gamma={spec.gamma}, lam={spec.lam}, "
        f"psi_sup={spec.psi_sup}, singular cell={result.singular_cell_value:.6g}"
    )
    return result


def convolve_values(values: np.ndarray, kernel: HartreeKernel) -> np.ndarray:
    """Linear convolution of grid samples with the kernel, cropped to the grid."""
    padded = np.zeros(kernel.padded_shape, dtype=np.result_type(values, float))
    crop = tuple(slice(0, n) for n in kernel.grid.shape)
    padded[crop] = values
    return ifft_values(kernel.padded_multiplier * fft_values(padded))[crop]


def convolve_density(density: np.ndarray, kernel: HartreeKernel) -> np.ndarray:
    return convolve_values(density, kernel).real


def potential_values(values: np.ndarray, kernel: HartreeKernel) -> np.ndarray:
    """K_gamma(|u|^2) for a raw physical-space array."""
    if kernel.is_trivial:
        return np.zeros(kernel.grid.shape)
    return np.maximum(convolve_density(np.abs(values) ** 2, kernel), 0.0)


def hartree_potential(u: ComplexField, kernel: HartreeKernel) -> np.ndarray:
    """K_gamma(|u|^2) on the grid; real and nonnegative."""
    check_same_grid(u.grid, kernel.grid)
    if u.space != Space.PHYSICAL:
        raise TypeError("hartree_potential expects a physical-space field")
    return potential_values(u.values, kernel)


def nonlinearity(u: ComplexField, kernel: HartreeKernel) -> ComplexField:
    """F(u) = lam K_gamma(|u|^2) u."""
    potential = hartree_potential(u, kernel)
    return ComplexField(u.grid, kernel.spec.lam * potential * u.values, Space.PHYSICAL)


def potential_energy_values(values: np.ndarray, kernel: HartreeKernel) -> float:
    density = np.abs(values) ** 2
    potential = potential_values(values, kernel)
    return float(0.25 * kernel.spec.lam * np.sum(potential * density) * kernel.grid.cell_volume)


def potential_energy(u: ComplexField, kernel: HartreeKernel) -> float:
    """V(u) = (lam/4) int K_gamma(|u|^2) |u|^2 dx."""
    check_same_grid(u.grid, kernel.grid)
    return potential_energy_values(u.values, kernel)


def kernel_self_check(kernel: HartreeKernel, taper_fraction: float = 0.5) -> float:
    """Max relative gap between the kernel transform and c_{n,gamma}|xi|^(gamma-n).

    The kernel is multiplied by exp(-|x|^2/R^2) with R = taper_fraction * L before
    transforming, which removes the box-truncation ripple; the comparison runs
    over |xi| in [max(1, 8/R), N pi / (4L)]. Only meaningful for constant psi.
    """
    grid = kernel.grid
    spec = kernel.spec
    taper_radius = taper_fraction * grid.half_length
    radius = padded_displacement_radius(grid)
    tapered = sample_kernel(grid, spec) * np.exp(-(radius / taper_radius) ** 2)
    transform = (grid.cell_volume * fft_values(tapered)).real
    n = grid.points_per_axis
    k = (np.pi / (2.0 * grid.half_length)) * np.concatenate([np.arange(0, n), np.arange(-n, 0)])
    xi = np.sqrt(sum(c ** 2 for c in np.meshgrid(*([k] * grid.dim), indexing='ij')))
    low = max(1.0, 8.0 / taper_radius)
    high = n * np.pi / (4.0 * grid.half_length)
    band = (xi >= low) & (xi <= high)
    if not np.any(band):
        return float('nan')
    reference = spec.psi_sup * riesz_constant(grid.dim, spec.gamma) * xi[band] ** (spec.gamma - grid.dim)
    deviation = float(np.max(np.abs(transform[band] - reference) / reference))
    if deviation > KERNEL_SELF_CHECK_TOLERANCE:
        logger.warning(
            f"Kernel multiplier deviates from c_(n,gamma)|xi|^(gamma-n) by {deviation:.2%}"
        )
    return deviation
