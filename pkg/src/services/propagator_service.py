"""
Propagator service - exact free flow U(t), the Strang split step for
i u_t = sigma(D) u + F(u), and the evolve() driver with observers, adaptive step
control and blowup detection.
"""

from typing import Callable, Iterable, Optional

import numpy as np
from loguru import logger

from ..consts import ADAPTIVE_DOUBLING_STREAK
from ..models.errors import NumericalInstabilityError
from ..models.evolution_models import (
    EvolutionSnapshot, EvolutionState, EvolutionStatus, StepController, TrajectorySummary
)
from ..models.hartree_models import HartreeKernel
from ..models.spectral_models import ComplexField, DispersionSymbol, Grid, Space
from .hartree_service import potential_energy_values, potential_values
from .spectral_service import (
    _as_physical, check_same_grid, fft_values, frequency_integral, ifft_values,
    mass_values, quadratic_form_hat, sobolev_weight
)

Observer = Callable[[EvolutionSnapshot], None]

# Landing tolerance for observation times, relative to dt.
_LANDING_SLACK = 1.0e-9


def free_propagator(symbol: DispersionSymbol, t: float) -> np.ndarray:
    """exp(-i t sigma(xi)) over the frequency lattice."""
    return np.exp(-1j * t * symbol.multiplier)


def free_evolve_values(values: np.ndarray, t: float, symbol: DispersionSymbol) -> np.ndarray:
    if t == 0:
        return np.array(values, dtype=np.complex128)
    return ifft_values(free_propagator(symbol, t) * fft_values(values))


def free_evolve(u: ComplexField, t: float, dispersion: DispersionSymbol) -> ComplexField:
    """U(t)u; unitary since |exp(-i t sigma)| = 1."""
    check_same_grid(u.grid, dispersion.grid)
    physical = _as_physical(u)
    return ComplexField(u.grid, free_evolve_values(physical.values, t, dispersion), Space.PHYSICAL)


def _half_step(state: EvolutionState, dt: float) -> np.ndarray:
    cached = state.propagator_cache.get(dt)
    if cached is None:
        if len(state.propagator_cache) > 8:
            state.propagator_cache.clear()
        cached = free_propagator(state.dispersion, 0.5 * dt)
        state.propagator_cache[dt] = cached
    return cached


def _weighted_norm_from_fft(hat_fft: np.ndarray, grid: Grid, weight: np.ndarray) -> float:
    power = np.abs(hat_fft) ** 2 * grid.cell_volume ** 2
    return float(np.sqrt(frequency_integral(weight * power, grid)))


def _gamma_half_norm_from_fft(hat_fft: np.ndarray, grid: Grid, gamma: float) -> float:
    """||u||_{H^{gamma/2}}, the blowup monitor."""
    return _weighted_norm_from_fft(hat_fft, grid, sobolev_weight(grid, 0.5 * gamma, "inhomogeneous"))


def _kinetic_norm_from_fft(hat_fft: np.ndarray, grid: Grid, alpha: float) -> float:
    """||u||_{H_dot^{alpha/2}}."""
    return _weighted_norm_from_fft(hat_fft, grid, sobolev_weight(grid, 0.5 * alpha, "homogeneous"))


def strang_step(state: EvolutionState, dt: float) -> EvolutionState:
    """One Strang step: half free flow, exact potential phase, half free flow.

    The potential is evaluated once from the field entering the nonlinear
    substep. Negative dt steps backwards and undoes a forward step.
    """
    if dt == 0:
        raise ValueError("dt must be nonzero")
    half = _half_step(state, dt)
    kernel = state.kernel
    grid = state.grid

    v = ifft_values(half * fft_values(state.u.values))
    if not kernel.is_trivial:
        potential = potential_values(v, kernel)
        v = np.exp(-1j * dt * kernel.spec.lam * potential) * v
    hat = half * fft_values(v)
    values = ifft_values(hat)

    if not np.all(np.isfinite(values)):
        raise NumericalInstabilityError(
            "non-finite values after Strang step", t=state.t + dt, step_count=state.step_count + 1
        )
    return EvolutionState(
        u=ComplexField(grid, values, Space.PHYSICAL),
        t=state.t + dt,
        dt=state.dt,
        dispersion=state.dispersion,
        kernel=kernel,
        step_count=state.step_count + 1,
        h_gamma_half=_gamma_half_norm_from_fft(hat, grid, kernel.spec.gamma),
        hdot_alpha_half=_kinetic_norm_from_fft(hat, grid, state.dispersion.exponent),
        propagator_cache=state.propagator_cache,
    )


def total_energy_values(values: np.ndarray, dispersion: DispersionSymbol, kernel: HartreeKernel) -> float:
    """E(u) = (1/2)<sigma(D) u, u> + V(u) for raw samples."""
    kinetic = 0.5 * quadratic_form_hat(fft_values(values), dispersion.grid, dispersion.multiplier)
    return kinetic + potential_energy_values(values, kernel)


def phase_modulate(u: ComplexField, t: float, m: float, alpha: float) -> ComplexField:
    """exp(i t m^alpha) u, the map from relativistic to shifted-relativistic solutions."""
    return u * np.exp(1j * t * m ** alpha)


def scale_field(u: ComplexField, a: float, alpha: float, gamma: float) -> ComplexField:
    """u_a(x) = a^((n - gamma + alpha)/2) u(a x) on the grid dilated to half-length L/a.

    For m = 0 this maps solutions to solutions with time rescaled by a^alpha.
    The samples are reused unchanged, so the map is exact on the lattice.
    """
    if not a > 0:
        raise ValueError(f"scale factor must be positive, got {a}")
    grid = u.grid
    physical = _as_physical(u)
    amplitude = a ** (0.5 * (grid.dim - gamma + alpha))
    return ComplexField(grid.dilated(a), amplitude * physical.values, Space.PHYSICAL)


def initial_state(
    u: ComplexField, dispersion: DispersionSymbol, kernel: HartreeKernel, dt: float, t: float = 0.0
) -> EvolutionState:
    check_same_grid(u.grid, dispersion.grid, kernel.grid)
    return EvolutionState(u=_as_physical(u), t=float(t), dt=float(dt), dispersion=dispersion, kernel=kernel)


def evolve(
    state: EvolutionState,
    t_final: float,
    controller: StepController,
    observers: Iterable[Observer] = (),
) -> TrajectorySummary:
    """Step to t_final, calling observers every controller.cadence time units.

    Steps are shortened to land on observation times and on t_final. The run
    stops early with BLOWUP when the H^{gamma/2} norm crosses the threshold,
    STALLED_NEAR_SINGULARITY when adaptive control pushes dt below dt_min, and
    INSTABILITY when non-finite values appear.
    """
    if not t_final > state.t:
        raise ValueError(f"t_final must exceed the current time {state.t}, got {t_final}")
    observers = list(observers)
    grid = state.grid
    gamma = state.kernel.spec.gamma

    initial_hat = fft_values(state.u.values)
    initial_norm = _gamma_half_norm_from_fft(initial_hat, grid, gamma)
    initial_hdot_norm = _kinetic_norm_from_fft(initial_hat, grid, state.dispersion.exponent)
    threshold = controller.blowup_threshold * initial_norm
    mass_initial = mass_values(state.u.values, grid)
    energy_initial = total_energy_values(state.u.values, state.dispersion, state.kernel)
    energy_previous = energy_initial

    cadence = controller.cadence
    dt = controller.dt
    state.dt = dt
    state.h_gamma_half = initial_norm
    state.hdot_alpha_half = initial_hdot_norm
    peak_norm = initial_norm
    peak_hdot_norm = initial_hdot_norm
    status = EvolutionStatus.COMPLETED
    blowup_time: Optional[float] = None
    message = ""
    rejected = 0
    streak = 0

    def notify(current: EvolutionState) -> None:
        if observers:
            snapshot = current.snapshot()
            for observer in observers:
                observer(snapshot)

    notify(state)
    next_observation = state.t + cadence

    while True:
        if next_observation >= t_final - _LANDING_SLACK * dt:
            target = t_final
        else:
            target = next_observation
        remaining = target - state.t
        lands = remaining <= dt * (1.0 + _LANDING_SLACK)
        step = remaining if lands else dt

        try:
            candidate = strang_step(state, step)
        except NumericalInstabilityError as e:
            status = EvolutionStatus.INSTABILITY
            message = str(e)
            logger.warning(f"Evolution aborted at t={state.t:.6g}: {e}")
            break

        if controller.is_adaptive:
            energy = total_energy_values(candidate.u.values, candidate.dispersion, candidate.kernel)
            if abs(energy - energy_previous) > controller.energy_tol:
                dt *= 0.5
                rejected += 1
                streak = 0
                logger.debug(f"Rejected step at t={state.t:.6g}, halving dt to {dt:.3e}")
                if dt < controller.dt_min:
                    status = EvolutionStatus.STALLED_NEAR_SINGULARITY
                    message = f"dt fell below dt_min={controller.dt_min:g} at t={state.t:.6g}"
                    break
                continue
            energy_previous = energy
            streak += 1
            if streak >= ADAPTIVE_DOUBLING_STREAK:
                grown = min(2.0 * dt, controller.dt_max)
                if grown != dt:
                    logger.debug(f"Doubling dt to {grown:.3e} at t={candidate.t:.6g}")
                dt = grown
                streak = 0

        state = candidate
        state.dt = dt
        if lands:
            state.t = target
        peak_norm = max(peak_norm, state.h_gamma_half)
        peak_hdot_norm = max(peak_hdot_norm, state.hdot_alpha_half)

        if state.h_gamma_half > threshold:
            status = EvolutionStatus.BLOWUP
            blowup_time = state.t
            message = (
                f"H^(gamma/2) norm {state.h_gamma_half:.4g} passed {controller.blowup_threshold:g}x "
                f"its initial value"
            )
            notify(state)
            break

        if lands:
            notify(state)
            if target == t_final:
                break
            next_observation += cadence

    final_norm = state.h_gamma_half if state.h_gamma_half is not None else initial_norm
    summary = TrajectorySummary(
        status=status,
        final_state=state,
        t_end=state.t,
        steps=state.step_count,
        rejected_steps=rejected,
        initial_norm=initial_norm,
        final_norm=final_norm,
        peak_norm=peak_norm,
        mass_initial=mass_initial,
        mass_final=mass_values(state.u.values, grid),
        energy_initial=energy_initial,
        energy_final=total_energy_values(state.u.values, state.dispersion, state.kernel),
        blowup_time=blowup_time,
        message=message,
        initial_hdot_norm=initial_hdot_norm,
        peak_hdot_norm=peak_hdot_norm,
    )
    if status == EvolutionStatus.STALLED_NEAR_SINGULARITY:
        logger.warning(f"Evolution stalled near a singularity: {message}")
    logger.info(
        f"Evolution finished with status={status.value} at t={summary.t_end:.6g} "
        f"after {summary.steps} steps (rejected {rejected})"
    )
    return summary
