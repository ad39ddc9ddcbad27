"""
Observables service - conserved quantities, virial functionals, moments,
Strichartz norms, the blowup parabola and the scattering state.
"""

from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import integrate
from loguru import logger

from ..consts import (
    BOUNDARY_AMPLITUDE_LIMIT, CENTROID_WARNING_FRACTION, MIN_CADENCE_SAMPLES, OBSERVABLE_COLUMNS
)
from ..models.errors import InsufficientSamplesError
from ..models.evolution_models import EvolutionSnapshot
from ..models.hartree_models import HartreeKernel, PotentialSpec
from ..models.observable_models import (
    Criticality, EnergyBreakdown, ObservableRecord, RegimeReport, ScatteringResult,
    StrichartzAccumulator, VirialResidualReport
)
from ..models.spectral_models import ComplexField, DispersionSymbol, Grid, Space
from .hartree_service import nonlinearity, potential_energy_values
from .propagator_service import free_evolve_values
from .spectral_service import (
    _as_physical, _symbol_power, apply_multiplier, check_same_grid, gradient_values,
    lebesgue_norm_values, mass_values, quadratic_form_values, sobolev_norm_values
)

TimedField = Tuple[float, ComplexField]


# Conserved quantities

def kinetic_energy(u: ComplexField, dispersion: DispersionSymbol) -> float:
    """K(u) = (1/2) <sigma(D) u, u>."""
    check_same_grid(u.grid, dispersion.grid)
    return 0.5 * quadratic_form_values(_as_physical(u).values, u.grid, dispersion.multiplier)


def energy(u: ComplexField, dispersion: DispersionSymbol, kernel: HartreeKernel) -> EnergyBreakdown:
    """(K, V, E) with E = K + V."""
    check_same_grid(u.grid, dispersion.grid, kernel.grid)
    physical = _as_physical(u)
    kinetic = kinetic_energy(physical, dispersion)
    potential = potential_energy_values(physical.values, kernel)
    return EnergyBreakdown(kinetic, potential, kinetic + potential)


# Virial functionals and moments

def dilation_virial(u: ComplexField) -> float:
    """<u, A u> = Im int conj(u) x.grad(u) dx with spectral derivatives."""
    physical = _as_physical(u)
    grid = u.grid
    gradient = gradient_values(physical.values, grid)
    flux = sum(x * g for x, g in zip(grid.coordinates, gradient))
    return float(np.imag(np.vdot(physical.values, flux)) * grid.cell_volume)


def weighted_virial(u: ComplexField, m: float, alpha: float) -> float:
    """<u, M u> = sum_k ||D_m^{(2-alpha)/2}(x_k u)||^2, with D_m = (m^2 - Laplacian)^(1/2)."""
    physical = _as_physical(u)
    grid = u.grid
    weight = _symbol_power(m ** 2 + grid.xi_squared, 2.0 - alpha)
    return float(sum(
        quadratic_form_values(x * physical.values, grid, weight) for x in grid.coordinates
    ))


def moment2(u: ComplexField) -> float:
    """||x u||^2."""
    physical = _as_physical(u)
    return float(np.sum(u.grid.radius_squared * np.abs(physical.values) ** 2) * u.grid.cell_volume)


def grad_moment(u: ComplexField) -> float:
    """|| |x| grad u ||."""
    physical = _as_physical(u)
    grid = u.grid
    gradient_power = sum(np.abs(g) ** 2 for g in gradient_values(physical.values, grid))
    return float(np.sqrt(np.sum(grid.radius_squared * gradient_power) * grid.cell_volume))


def free_dilation_rate(u: ComplexField, m: float, alpha: float) -> float:
    """d/dt <u, A u> under the free flow: alpha <u, D_m^alpha u> - alpha m^2 <u, D_m^(alpha-2) u>."""
    physical = _as_physical(u)
    grid = u.grid
    base = m ** 2 + grid.xi_squared
    leading = quadratic_form_values(physical.values, grid, _symbol_power(base, alpha))
    correction = quadratic_form_values(physical.values, grid, _symbol_power(base, alpha - 2.0))
    return alpha * leading - alpha * m ** 2 * correction


def centroid(u: ComplexField) -> np.ndarray:
    physical = _as_physical(u)
    density = np.abs(physical.values) ** 2
    total = np.sum(density)
    if total == 0:
        return np.zeros(u.grid.dim)
    return np.array([np.sum(x * density) / total for x in u.grid.coordinates])


def check_centered(u: ComplexField) -> bool:
    """Warn when the mass centroid sits further than L/10 from the origin."""
    offset = float(np.linalg.norm(centroid(u)))
    limit = CENTROID_WARNING_FRACTION * u.grid.half_length
    if offset > limit:
        logger.warning(f"Data centroid {offset:.4g} is further than {limit:.4g} from the origin")
        return False
    return True


def boundary_amplitude(u: ComplexField) -> float:
    """Largest |u| on the faces of the box."""
    values = np.abs(_as_physical(u).values)
    faces = []
    for axis in range(u.grid.dim):
        faces.append(np.take(values, 0, axis=axis).max())
        faces.append(np.take(values, -1, axis=axis).max())
    amplitude = float(max(faces))
    if amplitude > BOUNDARY_AMPLITUDE_LIMIT:
        logger.warning(f"Field amplitude {amplitude:.3e} at the box edge; enlarge L")
    return amplitude


def observe(
    u: ComplexField,
    t: float,
    dispersion: DispersionSymbol,
    kernel: HartreeKernel,
    extra: Optional[Dict[str, float]] = None,
) -> ObservableRecord:
    """All tracked diagnostics of u at time t."""
    physical = _as_physical(u)
    grid = u.grid
    kinetic, potential, total = energy(physical, dispersion, kernel)
    return ObservableRecord(
        t=float(t),
        mass=mass_values(physical.values, grid),
        kinetic=kinetic,
        potential=potential,
        energy=total,
        h_gamma_half=sobolev_norm_values(physical.values, grid, 0.5 * kernel.spec.gamma),
        dilation_virial=dilation_virial(physical),
        weighted_virial=weighted_virial(physical, dispersion.mass, dispersion.exponent),
        moment2=moment2(physical),
        grad_moment=grad_moment(physical),
        extra=dict(extra or {}),
    )


def records_frame(records: Sequence[ObservableRecord]) -> pd.DataFrame:
    frame = pd.DataFrame([record.as_row() for record in records])
    if frame.empty:
        return pd.DataFrame(columns=OBSERVABLE_COLUMNS)
    extras = [c for c in frame.columns if c not in OBSERVABLE_COLUMNS]
    return frame[OBSERVABLE_COLUMNS + sorted(extras)]


def write_observables_csv(records: Sequence[ObservableRecord], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    records_frame(records).to_csv(path, index=False, float_format='%.17g')
    logger.info(f"Wrote {len(records)} observable rows to {path}")
    return path


class ObservableRecorder:
    """Observer for evolve() that records diagnostics at every snapshot.

    Optionally keeps the fields, the forcing F(u(t)) for scattering_state, and
    feeds Strichartz accumulators.
    """

    def __init__(
        self,
        dispersion: DispersionSymbol,
        kernel: HartreeKernel,
        keep_fields: bool = False,
        keep_forcing: bool = False,
        accumulators: Sequence[StrichartzAccumulator] = (),
        extra_norms: Optional[Dict[str, float]] = None,
    ):
        # extra_norms maps a column name to a Sobolev index s; each snapshot
        # records ||u||_{H^s} under that name.
        self.dispersion = dispersion
        self.kernel = kernel
        self.keep_fields = keep_fields
        self.keep_forcing = keep_forcing
        self.accumulators = list(accumulators)
        self.extra_norms = dict(extra_norms or {})
        self.records: List[ObservableRecord] = []
        self.fields: List[TimedField] = []
        self.forcing: List[TimedField] = []

    def __call__(self, snapshot: EvolutionSnapshot) -> None:
        u = snapshot.to_field()
        if not self.records:
            check_centered(u)
        extra = {
            name: sobolev_norm_values(u.values, u.grid, s) for name, s in self.extra_norms.items()
        }
        self.records.append(observe(u, snapshot.t, self.dispersion, self.kernel, extra))
        for accumulator in self.accumulators:
            strichartz_update(accumulator, u, snapshot.t)
        if self.keep_fields:
            self.fields.append((snapshot.t, u))
        if self.keep_forcing:
            self.forcing.append((snapshot.t, nonlinearity(u, self.kernel)))

    def frame(self) -> pd.DataFrame:
        return records_frame(self.records)


# Virial inequalities and the blowup parabola

def _uniform_prefix(times: np.ndarray) -> int:
    """Length of the leading run of samples on a uniform cadence."""
    if times.size < 2:
        return times.size
    step = times[1] - times[0]
    diffs = np.diff(times)
    bad = np.flatnonzero(~np.isclose(diffs, step, rtol=1e-6, atol=0.0))
    return times.size if bad.size == 0 else int(bad[0]) + 1


def virial_inequality_residuals(
    records: Sequence[ObservableRecord],
    energy_phi: float,
    alpha: float,
    spec: Optional[PotentialSpec] = None,
) -> VirialResidualReport:
    """Central-difference checks of the dilation and weighted virial bounds.

    Reports max_t [d/dt <u,Au> - 2 alpha E(phi)], the fitted constant
    max_t [d/dt <u,Mu> - 2 alpha <u,Au>] / ||phi||^4 and
    max_t [d^2/dt^2 <u,Mu> - 4 alpha^2 E(phi)]. Trailing samples off the
    cadence (for instance a blowup stop) are ignored.
    """
    times = np.array([r.t for r in records], dtype=float)
    usable = _uniform_prefix(times)
    if usable < MIN_CADENCE_SAMPLES:
        raise InsufficientSamplesError(
            f"virial checks need at least {MIN_CADENCE_SAMPLES} samples on a uniform cadence, got {usable}"
        )
    records = list(records)[:usable]
    times = times[:usable]
    cadence = float(times[1] - times[0])
    dilation = np.array([r.dilation_virial for r in records])
    weighted = np.array([r.weighted_virial for r in records])
    mass = records[0].mass

    dilation_rates = (dilation[2:] - dilation[:-2]) / (2.0 * cadence)
    weighted_rates = (weighted[2:] - weighted[:-2]) / (2.0 * cadence)
    curvatures = (weighted[2:] - 2.0 * weighted[1:-1] + weighted[:-2]) / cadence ** 2

    psi_nonincreasing = True
    if spec is not None and not spec.is_constant:
        radii = spec.psi_radii[spec.psi_radii > 0]
        psi_nonincreasing = bool(np.all(spec.psi_prime(radii) <= 0))
        if not psi_nonincreasing:
            logger.warning("psi is not nonincreasing; the dilation virial bound is not expected to hold")

    return VirialResidualReport(
        samples=usable,
        cadence=cadence,
        energy=float(energy_phi),
        max_dilation_residual=float(np.max(dilation_rates - 2.0 * alpha * energy_phi)),
        fitted_constant=float(np.max(weighted_rates - 2.0 * alpha * dilation[1:-1]) / mass ** 2),
        max_concavity_residual=float(np.max(curvatures - 4.0 * alpha ** 2 * energy_phi)),
        psi_nonincreasing=psi_nonincreasing,
        dilation_rates=dilation_rates,
        weighted_rates=weighted_rates,
        weighted_curvatures=curvatures,
    )


def parabola_root(
    energy_phi: float,
    dilation_phi: float,
    weighted_phi: float,
    alpha: float,
    constant: float,
    l2_norm: float,
) -> Optional[float]:
    """Smallest positive root of 2 a^2 E t^2 + 2 a (A + C ||phi||^4) t + M, or None."""
    a = 2.0 * alpha ** 2 * energy_phi
    b = 2.0 * alpha * (dilation_phi + constant * l2_norm ** 4)
    c = weighted_phi
    if a == 0:
        if b == 0:
            return None
        root = -c / b
        return float(root) if root > 0 else None
    discriminant = b * b - 4.0 * a * c
    if discriminant < 0:
        return None
    sqrt_disc = np.sqrt(discriminant)
    q = -0.5 * (b + np.copysign(sqrt_disc, b))
    roots = [q / a] + ([c / q] if q != 0 else [])
    positive = [float(r) for r in roots if r > 0]
    return min(positive) if positive else None


# Strichartz norms

def strichartz_norm(u: ComplexField, r: float, sobolev_s: Optional[float] = None) -> float:
    """||(1 - Laplacian)^{s/2} u||_{L^r}; plain L^r when s is None."""
    physical = _as_physical(u)
    values = physical.values
    if sobolev_s:
        values = apply_multiplier(values, (1.0 + u.grid.xi_squared) ** (0.5 * sobolev_s))
    return lebesgue_norm_values(values, u.grid, r)


def strichartz_update(acc: StrichartzAccumulator, u: ComplexField, t: float) -> StrichartzAccumulator:
    if acc.last_t is not None and t <= acc.last_t:
        raise ValueError(f"Strichartz samples must have increasing t, got {t} after {acc.last_t}")
    norm = strichartz_norm(u, acc.r, acc.sobolev_s)
    if np.isinf(acc.q):
        acc.integral = max(acc.integral, norm)
    else:
        value = norm ** acc.q
        if acc.last_t is not None:
            acc.integral += 0.5 * (t - acc.last_t) * (value + acc.last_value)
        acc.last_value = value
    acc.last_t = float(t)
    acc.samples += 1
    return acc


def strichartz_value(acc: StrichartzAccumulator) -> float:
    if np.isinf(acc.q):
        return float(acc.integral)
    return float(acc.integral ** (1.0 / acc.q))


# Scattering

def scattering_state(
    forcing: Sequence[TimedField],
    phi: ComplexField,
    dispersion: DispersionSymbol,
    solution: Sequence[TimedField] = (),
    sobolev_s: float = 0.0,
) -> ScatteringResult:
    """phi_plus = phi - i int_0^T U(-t') F(u(t')) dt' by the trapezoid rule.

    Times are measured from the time of phi. When the solution samples are
    given, the defect ||u(t) - U(t) phi_plus||_{H^s} is evaluated at each of them.
    """
    if len(forcing) < MIN_CADENCE_SAMPLES:
        raise InsufficientSamplesError(
            f"scattering needs at least {MIN_CADENCE_SAMPLES} forcing snapshots, got {len(forcing)}"
        )
    check_same_grid(phi.grid, dispersion.grid)
    grid = phi.grid
    times = np.array([t for t, _ in forcing], dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValueError("forcing snapshots must have increasing times")

    integral = np.zeros(grid.shape, dtype=np.complex128)
    previous = None
    for i, (t, f) in enumerate(forcing):
        pulled_back = free_evolve_values(_as_physical(f).values, -t, dispersion)
        if previous is not None:
            integral += 0.5 * (t - times[i - 1]) * (pulled_back + previous)
        previous = pulled_back
    phi_plus = ComplexField(grid, _as_physical(phi).values - 1j * integral, Space.PHYSICAL)

    defect_times = np.array([t for t, _ in solution], dtype=float)
    defects = np.array([
        sobolev_norm_values(
            _as_physical(u).values - free_evolve_values(phi_plus.values, t, dispersion), grid, sobolev_s
        )
        for t, u in solution
    ])
    logger.debug(f"Scattering state built from {len(forcing)} snapshots up to T={times[-1]:.4g}")
    return ScatteringResult(
        asymptotic_state=phi_plus,
        horizon=float(times[-1]),
        sobolev_s=float(sobolev_s),
        times=defect_times,
        defects=defects,
    )


# Regime bookkeeping and supplementary bounds

def _compare(value: float, critical: float) -> Criticality:
    if np.isclose(value, critical, rtol=0.0, atol=1e-12):
        return Criticality.CRITICAL
    return Criticality.SUBCRITICAL if value < critical else Criticality.SUPERCRITICAL


def classify_regime(dim: int, alpha: float, gamma: float, s: Optional[float] = None) -> RegimeReport:
    """Mass regime (gamma vs alpha), energy regime (gamma vs 2 alpha) and s_c = (gamma - alpha)/2."""
    if not 0 < gamma < dim:
        raise ValueError(f"gamma must lie in (0, {dim}), got {gamma}")
    critical_index = 0.5 * (gamma - alpha)
    report = RegimeReport(
        dim=dim,
        alpha=alpha,
        gamma=gamma,
        mass_regime=_compare(gamma, alpha),
        energy_regime=_compare(gamma, 2.0 * alpha),
        critical_index=critical_index,
    )
    if s is not None:
        report.sobolev_index = s
        # Larger s means more regularity, so the comparison flips.
        report.sobolev_regime = _compare(critical_index, s)
    if report.mass_regime == Criticality.CRITICAL:
        report.notes.append("mass-critical: ground-state mass sets the global existence threshold")
    if report.energy_regime == Criticality.SUPERCRITICAL:
        report.notes.append("energy-supercritical: no H^{alpha/2} global theory")
    return report


def coercivity_lower_bound(
    phi: ComplexField, ground_state_mass: float, psi_sup: float, alpha: float
) -> float:
    """(1/2)(1 - ||psi||_inf ||phi||^2/||Q||^2) ||phi||^2_{H_dot^{alpha/2}}, a lower bound for E(phi)
    in the focusing mass-critical case."""
    if not ground_state_mass > 0:
        raise ValueError(f"ground state mass must be positive, got {ground_state_mass}")
    physical = _as_physical(phi)
    homogeneous = sobolev_norm_values(physical.values, phi.grid, 0.5 * alpha, "homogeneous")
    fraction = psi_sup * mass_values(physical.values, phi.grid) / ground_state_mass
    return 0.5 * (1.0 - fraction) * homogeneous ** 2


def is_admissible_pair(q: float, r: float, dim: int) -> bool:
    """2/q + n/r = n/2 with 2 <= q, r <= inf and (q, r) != (2, inf)."""
    if q < 2 or r < 2:
        return False
    if np.isinf(q) and np.isinf(r):
        return False
    if q == 2 and np.isinf(r):
        return False
    lhs = (0.0 if np.isinf(q) else 2.0 / q) + (0.0 if np.isinf(r) else dim / r)
    return bool(np.isclose(lhs, 0.5 * dim))


def derivative_loss(dim: int, alpha: float, r: float) -> float:
    """Sobolev index lost by the fractional Strichartz estimate at spatial exponent r."""
    inverse_r = 0.0 if np.isinf(r) else 1.0 / r
    return 0.5 * dim * (2.0 - alpha) * (0.5 - inverse_r)


def fit_moment_constant(times: np.ndarray, moment2_values: np.ndarray, h2_norms: np.ndarray) -> float:
    """c = max_t (sqrt(moment2(t)) - sqrt(moment2(0))) / int_0^t ||u||_{H^2}."""
    times = np.asarray(times, dtype=float)
    growth = np.sqrt(np.asarray(moment2_values, dtype=float))
    growth = growth - growth[0]
    budget = integrate.cumulative_trapezoid(np.asarray(h2_norms, dtype=float), times, initial=0.0)
    valid = budget > 0
    if not np.any(valid):
        return 0.0
    return float(max(0.0, np.max(growth[valid] / budget[valid])))
