"""
Ground state service.

Q is found in three stages: preconditioned gradient descent on the
scale-invariant quotient W(u) = T^theta N^(2-theta) / P at fixed mass, an
exact rescaling Q(x) = a u(b x) onto the Euler-Lagrange equation with frequency
-1, and a Petviashvili fixed-point polish. Here T = ||u||^2 in H_dot^{alpha/2},
N = ||u||^2, P = |V_1(u)| = (1/4)<(|x|^-gamma * |u|^2) u, u> and theta = gamma/alpha.
"""

from typing import Optional, Tuple

import numpy as np
from scipy import fft as sfft
from loguru import logger

from ..consts import (
    FFT_WORKERS, GROUND_STATE_DEFAULT_MAX_ITER, GROUND_STATE_DEFAULT_TOL,
    GROUND_STATE_INITIAL_WIDTH_FRACTION
)
from ..models.errors import GroundStateCollapseError
from ..models.ground_state_models import GroundStateResult
from ..models.hartree_models import HartreeKernel, PotentialSpec
from ..models.spectral_models import ComplexField, Grid, Space
from .hartree_service import build_kernel, potential_energy_values, potential_values
from .spectral_service import (
    _as_physical, _symbol_power, fft_values, ifft_values, mass_values, quadratic_form_hat,
    sobolev_norm_values
)

_DESCENT_TOL = 1.0e-10
_MAX_BACKTRACKS = 60
_PETVIASHVILI_EXPONENT = 1.5
_POLISH_MAX_ITER = 2000


def unit_kernel(grid: Grid, gamma: float) -> HartreeKernel:
    """Kernel of |x|^-gamma (psi = 1)."""
    return build_kernel(grid, PotentialSpec(gamma=gamma, lam=-1))


def _parts(values: np.ndarray, grid: Grid, symbol: np.ndarray, kernel: HartreeKernel):
    hat = fft_values(values)
    kinetic = quadratic_form_hat(hat, grid, symbol)
    mass = mass_values(values, grid)
    potential = potential_values(values, kernel)
    interaction = 0.25 * float(np.sum(potential * np.abs(values) ** 2) * grid.cell_volume)
    return hat, kinetic, mass, potential, interaction


def _quotient(kinetic: float, mass: float, interaction: float, theta: float) -> float:
    if interaction <= 0:
        return np.inf
    return kinetic ** theta * mass ** (2.0 - theta) / interaction


def weinstein_quotient(u: ComplexField, alpha: float, gamma: float, kernel: Optional[HartreeKernel] = None) -> float:
    """W(u) = ||u||_{H_dot^{alpha/2}}^{2 theta} ||u||^{2(2 - theta)} / |V_1(u)|, theta = gamma/alpha."""
    physical = _as_physical(u)
    grid = u.grid
    kernel = kernel or unit_kernel(grid, gamma)
    symbol = _symbol_power(grid.xi_squared, alpha)
    _, kinetic, mass, _, interaction = _parts(physical.values, grid, symbol, kernel)
    return _quotient(kinetic, mass, interaction, gamma / alpha)


def initial_guess(grid: Grid) -> np.ndarray:
    """Unit-mass Gaussian of width L/6."""
    width = GROUND_STATE_INITIAL_WIDTH_FRACTION * grid.half_length
    profile = np.exp(-0.5 * grid.radius_squared / width ** 2)
    return profile / np.sqrt(mass_values(profile, grid))


def dilate_samples(values: np.ndarray, grid: Grid, scale: float) -> np.ndarray:
    """Samples of u(scale * x) by trigonometric interpolation along each axis.

    Points with |scale * x| >= L fall outside the box and are set to 0.
    """
    n = grid.points_per_axis
    target = scale * grid.axis
    modes = grid.axis_wavenumbers.copy()
    evaluation = np.exp(1j * np.outer(target + grid.half_length, modes)) / n
    evaluation[:, n // 2] = 0.0
    evaluation[np.abs(target) >= grid.half_length, :] = 0.0
    result = np.asarray(values, dtype=np.complex128)
    for axis in range(grid.dim):
        coefficients = sfft.fft(result, axis=axis, workers=FFT_WORKERS)
        result = np.moveaxis(np.tensordot(evaluation, coefficients, axes=([1], [axis])), 0, axis)
    return result


def _normalize_sign(values: np.ndarray) -> np.ndarray:
    """Remove the global phase so the largest sample is real positive; keep signs."""
    peak = values.flat[np.argmax(np.abs(values))]
    rotated = values * (np.conj(peak) / abs(peak))
    return rotated.real


def _residual_from_hats(q_hat: np.ndarray, forcing_hat: np.ndarray, symbol: np.ndarray, grid: Grid, alpha: float) -> float:
    defect = (symbol + 1.0) * q_hat - forcing_hat
    norm = np.sum((1.0 + grid.xi_squared) ** alpha * np.abs(q_hat) ** 2)
    return float(np.sqrt(np.sum(np.abs(defect) ** 2) / norm))


def euler_lagrange_residual(Q: ComplexField, alpha: float, kernel: HartreeKernel) -> float:
    """|| |D|^alpha Q - (|x|^-gamma * |Q|^2) Q + Q || / ||Q||_{H^alpha}."""
    physical = _as_physical(Q)
    grid = Q.grid
    symbol = _symbol_power(grid.xi_squared, alpha)
    potential = potential_values(physical.values, kernel)
    return _residual_from_hats(
        fft_values(physical.values), fft_values(potential * physical.values), symbol, grid, alpha
    )


def _descend(
    values: np.ndarray, grid: Grid, symbol: np.ndarray, kernel: HartreeKernel,
    theta: float, max_iter: int, history: list
) -> Tuple[np.ndarray, int]:
    target_mass = mass_values(values, grid)
    hat, kinetic, mass, potential, interaction = _parts(values, grid, symbol, kernel)
    quotient = _quotient(kinetic, mass, interaction, theta)
    history.append(quotient)
    step = None
    iterations = 0
    for iterations in range(1, max_iter + 1):
        kinetic_term = ifft_values(symbol * hat).real
        gradient = quotient * (
            2.0 * theta * kinetic_term / kinetic
            + 2.0 * (2.0 - theta) * values / mass
            - potential * values / interaction
        )
        shift = kinetic / mass
        direction = ifft_values(fft_values(gradient) / (shift + symbol)).real
        direction_norm = np.sqrt(mass_values(direction, grid))
        if direction_norm == 0:
            break
        if step is None:
            step = 0.1 * np.sqrt(mass) / direction_norm
        else:
            step *= 2.0

        accepted = False
        for _ in range(_MAX_BACKTRACKS):
            trial = values - step * direction
            trial_mass = mass_values(trial, grid)
            if trial_mass < 1e-30:
                raise GroundStateCollapseError(f"iterate collapsed to zero at iteration {iterations}")
            trial *= np.sqrt(target_mass / trial_mass)
            parts = _parts(trial, grid, symbol, kernel)
            trial_quotient = _quotient(parts[1], parts[2], parts[4], theta)
            if trial_quotient < quotient:
                accepted = True
                break
            step *= 0.5
            logger.debug(f"Quotient line search backtrack, step={step:.3e}")
        if not accepted:
            logger.debug(f"Line search exhausted after {iterations} iterations")
            break

        decrease = (quotient - trial_quotient) / quotient
        values = trial
        hat, kinetic, mass, potential, interaction = parts
        quotient = trial_quotient
        history.append(quotient)
        if decrease < _DESCENT_TOL:
            break
    return values, iterations


def _rescale_to_equation(
    values: np.ndarray, grid: Grid, symbol: np.ndarray, kernel: HartreeKernel, theta: float
) -> np.ndarray:
    """Q(x) = a u(b x) with b^alpha = theta N / ((2 - theta) T), a^2 = N b^(n-gamma) / (2 (2 - theta) P)."""
    _, kinetic, mass, _, interaction = _parts(values, grid, symbol, kernel)
    alpha = kernel.spec.gamma / theta
    b = (theta * mass / ((2.0 - theta) * kinetic)) ** (1.0 / alpha)
    a = np.sqrt(mass * b ** (grid.dim - kernel.spec.gamma) / (2.0 * (2.0 - theta) * interaction))
    logger.debug(f"Rescaling quotient minimizer with a={a:.6g}, b={b:.6g}")
    return a * dilate_samples(values, grid, b).real


def _polish(
    values: np.ndarray, grid: Grid, symbol: np.ndarray, kernel: HartreeKernel,
    alpha: float, tol: float, max_iter: int
) -> Tuple[np.ndarray, float, int]:
    """Petviashvili iteration Q <- M^(3/2) (|D|^alpha + 1)^-1 (Phi Q)."""
    operator = symbol + 1.0
    q_hat = fft_values(values)
    forcing_hat = fft_values(potential_values(values, kernel) * values)
    residual = _residual_from_hats(q_hat, forcing_hat, symbol, grid, alpha)
    iterations = 0
    while residual >= tol and iterations < max_iter:
        numerator = np.sum(operator * np.abs(q_hat) ** 2)
        denominator = np.real(np.vdot(q_hat, forcing_hat))
        if denominator <= 0:
            raise GroundStateCollapseError("Petviashvili stabilizing factor undefined")
        factor = (numerator / denominator) ** _PETVIASHVILI_EXPONENT
        values = ifft_values(factor * forcing_hat / operator).real
        q_hat = fft_values(values)
        forcing_hat = fft_values(potential_values(values, kernel) * values)
        residual = _residual_from_hats(q_hat, forcing_hat, symbol, grid, alpha)
        iterations += 1
    return values, residual, iterations


def solve_ground_state(
    grid: Grid,
    alpha: float,
    gamma: float,
    tol: float = GROUND_STATE_DEFAULT_TOL,
    max_iter: int = GROUND_STATE_DEFAULT_MAX_ITER,
    polish_max_iter: int = _POLISH_MAX_ITER,
) -> GroundStateResult:
    """Ground state of |D|^alpha Q - (|x|^-gamma * |Q|^2) Q = -Q on the grid."""
    if not 1.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (1, 2], got {alpha}")
    if not 0.0 < gamma < grid.dim:
        raise ValueError(f"gamma must lie in (0, {grid.dim}), got {gamma}")
    if not gamma < 2.0 * alpha:
        raise ValueError(f"gamma must be below 2*alpha for a ground state, got {gamma}")
    theta = gamma / alpha
    kernel = unit_kernel(grid, gamma)
    symbol = _symbol_power(grid.xi_squared, alpha)
    history: list = []

    logger.info(f"Solving ground state n={grid.dim}, N={grid.points_per_axis}, alpha={alpha}, gamma={gamma}")
    values, iterations = _descend(initial_guess(grid), grid, symbol, kernel, theta, max_iter, history)
    values = _rescale_to_equation(values, grid, symbol, kernel, theta)
    values, residual, polish_iterations = _polish(values, grid, symbol, kernel, alpha, tol, polish_max_iter)
    values = _normalize_sign(values)
    if mass_values(values, grid) < 1e-30:
        raise GroundStateCollapseError("ground state iterate collapsed to zero")

    Q = ComplexField(grid, values, Space.PHYSICAL)
    residual = euler_lagrange_residual(Q, alpha, kernel)
    _, kinetic, mass, _, interaction = _parts(values, grid, symbol, kernel)
    converged = residual < tol
    pairing = abs(kinetic - 4.0 * interaction + mass) / mass
    n = grid.dim
    pohozaev = abs(0.5 * (alpha - n) * kinetic - 0.5 * n * mass - (gamma - 2.0 * n) * interaction) / mass

    result = GroundStateResult(
        Q=Q,
        alpha=alpha,
        gamma=gamma,
        residual=residual,
        mass=mass,
        quotient_value=_quotient(kinetic, mass, interaction, theta),
        iterations=iterations,
        polish_iterations=polish_iterations,
        converged=converged,
        kinetic=kinetic,
        potential_magnitude=interaction,
        pairing_defect=pairing,
        pohozaev_defect=pohozaev,
        quotient_history=history,
        message="" if converged else f"residual {residual:.3e} above tolerance {tol:.1e}",
    )
    if converged:
        logger.info(
            f"Ground state converged: ||Q||^2={mass:.8g}, residual={residual:.3e}, "
            f"descent={iterations}, polish={polish_iterations}"
        )
    else:
        logger.warning(f"Ground state did not converge: {result.message}")
    return result


def critical_mass_threshold(result: GroundStateResult, psi_sup: float) -> float:
    """||Q|| / sqrt(||psi||_inf)."""
    if not psi_sup > 0:
        raise ValueError(f"psi_sup must be positive, got {psi_sup}")
    return result.l2_norm / np.sqrt(psi_sup)


def quotient_J(u: ComplexField, alpha: float, gamma: float, kernel: HartreeKernel) -> float:
    """|V(u)| / (||u||_{H_dot^{alpha/2}}^{2 gamma/alpha} ||u||^{2(2 - gamma/alpha)})."""
    if not alpha < gamma < min(2.0 * alpha, u.grid.dim):
        raise ValueError(f"quotient_J needs alpha < gamma < min(2 alpha, n), got alpha={alpha}, gamma={gamma}")
    physical = _as_physical(u)
    grid = u.grid
    mass = mass_values(physical.values, grid)
    if mass == 0:
        raise ValueError("quotient_J is undefined for the zero function")
    homogeneous = sobolev_norm_values(physical.values, grid, 0.5 * alpha, "homogeneous")
    theta = gamma / alpha
    potential = abs(potential_energy_values(physical.values, kernel))
    return potential / (homogeneous ** (2.0 * theta) * mass ** (2.0 - theta))


def ground_state_profile(result: GroundStateResult, mass: float) -> ComplexField:
    """Q scaled in amplitude to the requested mass."""
    if not mass > 0:
        raise ValueError(f"mass must be positive, got {mass}")
    return result.Q * np.sqrt(mass / result.mass)
