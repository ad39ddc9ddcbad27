"""
Inequality lab - evaluates both sides of the harmonic-analysis inequalities on
seeded function families and reports the worst LHS/RHS ratio.

Every checker also reports the ratio on the 2x refined grid (same continuum
functions) and the relative change of the worst ratio under the inequality's
exact symmetries.
"""

import json
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage, special
from loguru import logger

from ..consts import (
    COMMUTATOR_IDENTITY_TOLERANCE, INEQUALITY_REGRESSION_SLACK, REFINEMENT_RATIO_BOUNDS, SYMMETRY_DEFECT_TOLERANCE
)
from ..models.hartree_models import HartreeKernel, PotentialSpec
from ..models.inequality_models import FieldFamily, GridSpec, HolderSplit, InequalityId, RatioReport
from ..models.spectral_models import ComplexField, Grid, Space
from .hartree_service import build_kernel, convolve_values, potential_values, singular_cell_average
from .spectral_service import (
    _as_physical, _symbol_power, apply_multiplier, lebesgue_norm_values, mass_values,
    sobolev_norm_values
)

RatioFunction = Callable[[int, Grid], float]

DEFAULT_COMMUTATOR_MASSES = (0.5, 1.0, 2.0, 4.0)


class KernelCache:
    """Unit-profile kernels |x|^-exponent keyed by grid and exponent."""

    def __init__(self):
        self._kernels: Dict[Tuple[Grid, float], HartreeKernel] = {}

    def get(self, grid: Grid, exponent: float) -> HartreeKernel:
        key = (grid, float(exponent))
        if key not in self._kernels:
            self._kernels[key] = build_kernel(grid, PotentialSpec(gamma=exponent, lam=1))
        return self._kernels[key]


def singular_weight(grid: Grid, exponent: float) -> np.ndarray:
    """|x|^-exponent on the grid; the origin sample is the cell average when singular."""
    weight = np.ones(grid.shape)
    positive = grid.radius > 0
    weight[positive] = grid.radius[positive] ** (-exponent)
    origin = grid.radius == 0
    if np.any(origin):
        weight[origin] = singular_cell_average(grid, exponent) if exponent > 0 else 0.0 ** (-exponent)
    return weight


def _inverse(p: float) -> float:
    return 0.0 if np.isinf(p) else 1.0 / p


def _relative_gap(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


# Per-sample ratios

def hardy_ratio(u: ComplexField, kernel: HartreeKernel) -> float:
    """sup_x (|x|^-gamma * |u|^2)(x) / ||u||^2_{H_dot^{gamma/2}}."""
    physical = _as_physical(u)
    lhs = float(np.max(potential_values(physical.values, kernel)))
    rhs = sobolev_norm_values(physical.values, u.grid, 0.5 * kernel.spec.gamma, "homogeneous") ** 2
    return lhs / rhs


def kgamma_ratio(u: ComplexField, kernel: HartreeKernel, epsilon: float) -> float:
    """||K_gamma(|u|^2)||_inf / (||u||_{L^{2n/(n-gamma-eps)}} ||u||_{L^{2n/(n-gamma+eps)}})."""
    n = u.grid.dim
    gamma = kernel.spec.gamma
    physical = _as_physical(u)
    lhs = float(np.max(potential_values(physical.values, kernel)))
    p1 = 2.0 * n / (n - gamma - epsilon)
    p2 = 2.0 * n / (n - gamma + epsilon)
    rhs = lebesgue_norm_values(physical.values, u.grid, p1) * lebesgue_norm_values(physical.values, u.grid, p2)
    return lhs / rhs


def stein_weiss_ratio(f: ComplexField, kernel: HartreeKernel, beta: float, p: float) -> float:
    """||x|^-beta (|x|^-lambda * f)||_{L^p} / ||f||_{L^p}."""
    physical = _as_physical(f)
    grid = f.grid
    rhs = lebesgue_norm_values(physical.values, grid, p)
    if rhs == 0:
        raise ValueError("Stein-Weiss ratio is undefined for the zero function")
    convolution = np.abs(convolve_values(physical.values, kernel))
    weight = singular_weight(grid, beta * p)
    lhs = float((np.sum(weight * convolution ** p) * grid.cell_volume) ** (1.0 / p))
    return lhs / rhs


def _fractional_derivative(values: np.ndarray, grid: Grid, s: float) -> np.ndarray:
    if s == 0:
        return values
    return apply_multiplier(values, _symbol_power(grid.xi_squared, s))


def leibniz_ratio(u: ComplexField, v: ComplexField, s: float, split: HolderSplit) -> float:
    """|| |D|^s (uv) ||_r / (|| |D|^s u ||_{r1} ||v||_{q2} + ||u||_{q1} || |D|^s v ||_{r2})."""
    grid = u.grid
    uu = _as_physical(u).values
    vv = _as_physical(v).values
    lhs = lebesgue_norm_values(_fractional_derivative(uu * vv, grid, s), grid, split.r)
    rhs = (
        lebesgue_norm_values(_fractional_derivative(uu, grid, s), grid, split.r1)
        * lebesgue_norm_values(vv, grid, split.q2)
        + lebesgue_norm_values(uu, grid, split.q1)
        * lebesgue_norm_values(_fractional_derivative(vv, grid, s), grid, split.r2)
    )
    return lhs / rhs


def sphere_quadrature(dim: int, angular_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Unit vectors and weights of a product rule on S^{n-1}, n = 2 or 3."""
    if dim == 2:
        theta = 2.0 * np.pi * np.arange(angular_nodes) / angular_nodes
        directions = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return directions, np.full(angular_nodes, 2.0 * np.pi / angular_nodes)
    if dim == 3:
        cosines, weights = special.roots_legendre(angular_nodes)
        azimuths = 2.0 * np.pi * np.arange(2 * angular_nodes) / (2 * angular_nodes)
        c, phi = np.meshgrid(cosines, azimuths, indexing='ij')
        sine = np.sqrt(1.0 - c ** 2)
        directions = np.stack([sine * np.cos(phi), sine * np.sin(phi), c], axis=-1).reshape(-1, 3)
        w = np.outer(weights, np.full(2 * angular_nodes, 2.0 * np.pi / (2 * angular_nodes))).ravel()
        return directions, w
    raise ValueError(f"sphere quadrature needs n = 2 or 3, got {dim}")


def mixed_radial_angular_norm(
    values: np.ndarray, grid: Grid, q: float, radial_weight: float,
    radial_nodes: Optional[int] = None, angular_nodes: int = 32,
) -> float:
    """int_0^L (int_S |r^radial_weight g(r w)|^q dw)^(1/q) r^(n-1) dr by polar resampling.

    Samples are interpolated with cubic splines in index coordinates, so the
    value is exactly covariant under dilating the grid.
    """
    radial_nodes = radial_nodes or grid.points_per_axis // 2
    directions, weights = sphere_quadrature(grid.dim, angular_nodes)
    dr = grid.half_length / radial_nodes
    radii = (np.arange(radial_nodes) + 0.5) * dr
    points = radii[:, None, None] * directions[None, :, :]
    index = ((points + grid.half_length) / grid.spacing).reshape(-1, grid.dim).T
    real = ndimage.map_coordinates(values.real, index, order=3, mode='nearest')
    imag = ndimage.map_coordinates(values.imag, index, order=3, mode='nearest')
    magnitude = np.abs(real + 1j * imag).reshape(radial_nodes, -1) * radii[:, None] ** radial_weight
    if np.isinf(q):
        sphere = np.max(magnitude, axis=1)
    else:
        sphere = (magnitude ** q @ weights) ** (1.0 / q)
    return float(np.sum(sphere * radii ** (grid.dim - 1)) * dr)


def weighted_convolution_ratio(
    f: ComplexField, kernel: HartreeKernel, p: float, q: float, d1: float, d2: float,
    angular_nodes: int = 32,
) -> float:
    """||x|^d1 (|x|^-(n/p+d2) * f)||_{L^p} / || |x|^-(d2-d1) f ||_{L^1_r L^q_w}."""
    grid = f.grid
    physical = _as_physical(f).values
    convolution = np.abs(convolve_values(physical, kernel))
    weighted = grid.radius ** d1 * convolution
    if np.isinf(p):
        lhs = float(np.max(weighted))
    else:
        lhs = float((np.sum(weighted ** p) * grid.cell_volume) ** (1.0 / p))
    rhs = mixed_radial_angular_norm(physical, grid, q, d1 - d2, angular_nodes=angular_nodes)
    return lhs / rhs


def commutator_value(u: ComplexField, m: float, alpha: float, kernel: HartreeKernel) -> complex:
    """<u, [D_m^{2-alpha}, |x|^2 K_alpha(|u|^2)] u>; purely imaginary, zero for real u."""
    physical = _as_physical(u).values
    grid = u.grid
    multiplier = _symbol_power(m ** 2 + grid.xi_squared, 2.0 - alpha)
    weight = grid.radius_squared * potential_values(physical, kernel)
    first = np.vdot(physical, apply_multiplier(weight * physical, multiplier))
    second = np.vdot(physical, weight * apply_multiplier(physical, multiplier))
    return complex((first - second) * grid.cell_volume)


def commutator_ratio(u: ComplexField, m: float, alpha: float, kernel: HartreeKernel) -> float:
    """|commutator_value| / ||u||^4."""
    mass = mass_values(_as_physical(u).values, u.grid)
    return abs(commutator_value(u, m, alpha, kernel)) / mass ** 2


# Family scans

def scan_family(family: FieldFamily, grid: Grid, ratio: RatioFunction) -> Tuple[float, int, int]:
    """(worst ratio, its seed, number of members) over the family on one grid."""
    worst = -np.inf
    worst_seed = -1
    seeds = family.seeds()
    for seed in seeds:
        value = ratio(seed, grid)
        if not np.isfinite(value):
            logger.warning(f"Non-finite ratio for {family.describe(seed)}")
            worst, worst_seed = np.inf, seed
            break
        if value > worst:
            worst, worst_seed = value, seed
    return float(worst), worst_seed, len(seeds)


def _report(
    inequality_id: InequalityId,
    family: FieldFamily,
    grid: Grid,
    ratio: RatioFunction,
    symmetry: Callable[[int], float],
    params: Dict[str, float],
    refine: bool = True,
    gated: bool = True,
    notes: Sequence[str] = (),
    sweep: Optional[Dict[str, float]] = None,
) -> RatioReport:
    worst, seed, count = scan_family(family, grid, ratio)
    refinement = None
    if refine and np.isfinite(worst):
        refined_worst, _, _ = scan_family(family, grid.refined(), ratio)
        refinement = refined_worst / worst
    report = RatioReport(
        inequality_id=inequality_id,
        params=params,
        samples=count,
        worst_ratio=worst,
        worst_case_seed=seed,
        grid_spec=GridSpec.of(grid),
        refinement_ratio=refinement,
        symmetry_defect=symmetry(seed) if np.isfinite(worst) else None,
        sweep=sweep or {},
        gated=gated,
        notes=list(notes),
    )
    logger.info(
        f"{inequality_id.value}: worst ratio {worst:.6g} at {family.describe(seed)}, "
        f"refinement {refinement if refinement is None else round(refinement, 4)}"
    )
    return report


def _shift(u: ComplexField, steps: int) -> ComplexField:
    axes = tuple(range(u.grid.dim))
    return ComplexField(u.grid, np.roll(_as_physical(u).values, (steps,) * u.grid.dim, axis=axes), Space.PHYSICAL)


def _on_grid(u: ComplexField, grid: Grid) -> ComplexField:
    """The same samples placed on another grid with the same lattice shape."""
    return ComplexField(grid, _as_physical(u).values, Space.PHYSICAL)


# Checkers

def check_hardy(family: FieldFamily, gamma: float, grid: Grid, refine: bool = True) -> RatioReport:
    if not 0 < gamma < grid.dim:
        raise ValueError(f"Hardy check needs 0 < gamma < {grid.dim}, got {gamma}")
    kernels = KernelCache()

    def ratio(seed: int, g: Grid) -> float:
        return hardy_ratio(family.sample(seed, g), kernels.get(g, gamma))

    def symmetry(seed: int) -> float:
        u = family.sample(seed, grid)
        kernel = kernels.get(grid, gamma)
        base = hardy_ratio(u, kernel)
        return max(
            _relative_gap(hardy_ratio(2.5 * u, kernel), base),
            _relative_gap(hardy_ratio(_shift(u, grid.points_per_axis // 8), kernel), base),
        )

    return _report(InequalityId.HARDY, family, grid, ratio, symmetry, {'gamma': gamma}, refine)


def check_kgamma_bound(
    family: FieldFamily, gamma: float, epsilon: float, grid: Grid, refine: bool = True
) -> RatioReport:
    n = grid.dim
    if not 0 < gamma < n:
        raise ValueError(f"K_gamma bound needs 0 < gamma < {n}, got {gamma}")
    if not 0 < epsilon < n - gamma:
        raise ValueError(f"epsilon must lie in (0, {n - gamma}), got {epsilon}")
    kernels = KernelCache()

    def ratio(seed: int, g: Grid) -> float:
        return kgamma_ratio(family.sample(seed, g), kernels.get(g, gamma), epsilon)

    def symmetry(seed: int) -> float:
        u = family.sample(seed, grid)
        kernel = kernels.get(grid, gamma)
        base = kgamma_ratio(u, kernel, epsilon)
        return max(
            _relative_gap(kgamma_ratio(3.0 * u, kernel, epsilon), base),
            _relative_gap(kgamma_ratio(_shift(u, grid.points_per_axis // 8), kernel, epsilon), base),
        )

    return _report(
        InequalityId.KGAMMA_BOUND, family, grid, ratio, symmetry,
        {'gamma': gamma, 'epsilon': epsilon}, refine,
    )


def check_stein_weiss(
    family: FieldFamily, beta: float, lambda_exp: float, p: float, grid: Grid, refine: bool = True
) -> RatioReport:
    n = grid.dim
    if not 1 < p < np.inf:
        raise ValueError(f"Stein-Weiss needs 1 < p < inf, got {p}")
    if not 0 < lambda_exp < n:
        raise ValueError(f"Stein-Weiss needs 0 < lambda < {n}, got {lambda_exp}")
    if not beta < n / p:
        raise ValueError(f"Stein-Weiss needs beta < n/p = {n / p}, got {beta}")
    if not np.isclose(lambda_exp + beta, n):
        raise ValueError(f"Stein-Weiss needs lambda + beta = n, got {lambda_exp} + {beta}")
    kernels = KernelCache()

    def ratio(seed: int, g: Grid) -> float:
        return stein_weiss_ratio(family.sample(seed, g), kernels.get(g, lambda_exp), beta, p)

    def symmetry(seed: int) -> float:
        u = family.sample(seed, grid)
        base = stein_weiss_ratio(u, kernels.get(grid, lambda_exp), beta, p)
        stretched = grid.dilated(0.5)
        dilated = stein_weiss_ratio(_on_grid(u, stretched), kernels.get(stretched, lambda_exp), beta, p)
        scaled = stein_weiss_ratio(4.0 * u, kernels.get(grid, lambda_exp), beta, p)
        return max(_relative_gap(dilated, base), _relative_gap(scaled, base))

    return _report(
        InequalityId.STEIN_WEISS, family, grid, ratio, symmetry,
        {'beta': beta, 'lambda': lambda_exp, 'p': p}, refine,
    )


def check_leibniz(
    family: FieldFamily, s: float, split: HolderSplit, grid: Grid, refine: bool = True
) -> RatioReport:
    if s < 0:
        raise ValueError(f"Leibniz check needs s >= 0, got {s}")

    def ratio(seed: int, g: Grid) -> float:
        return leibniz_ratio(family.sample(seed, g), family.sample(seed, g, stream=1), s, split)

    def symmetry(seed: int) -> float:
        u = family.sample(seed, grid)
        v = family.sample(seed, grid, stream=1)
        base = leibniz_ratio(u, v, s, split)
        shift = grid.points_per_axis // 8
        return max(
            _relative_gap(leibniz_ratio(2.0 * u, v, s, split), base),
            _relative_gap(leibniz_ratio(_shift(u, shift), _shift(v, shift), s, split), base),
        )

    params = {'s': s, **split.as_params()}
    return _report(InequalityId.LEIBNIZ, family, grid, ratio, symmetry, params, refine)


def validate_weighted_convolution(dim: int, p: float, q: float, d1: float, d2: float) -> bool:
    """Check the exponent constraints; returns False for the reported-only p = inf, d1 = d2 endpoint."""
    if dim not in (2, 3):
        raise ValueError(f"weighted convolution check needs n = 2 or 3, got {dim}")
    if not (1 <= p <= np.inf and 1 <= q <= np.inf):
        raise ValueError(f"weighted convolution needs 1 <= p, q <= inf, got p={p}, q={q}")
    exponent = dim * _inverse(p) + d2
    if not 0 < exponent < dim:
        raise ValueError(f"weighted convolution kernel exponent n/p + d2 = {exponent:g} must lie in (0, {dim})")
    dual_limit = (dim - 1) * (1.0 - _inverse(p))
    endpoint = np.isinf(p) and d1 == d2
    if not endpoint and not 0 <= d1 < d2 < dual_limit:
        raise ValueError(f"weighted convolution needs 0 <= d1 < d2 < {dual_limit}, got d1={d1}, d2={d2}")
    if endpoint and not 0 <= d2 < dual_limit:
        raise ValueError(f"endpoint case needs 0 <= d1 = d2 < {dual_limit}, got {d2}")
    if not _inverse(q) <= 1.0 - d2 / (dim - 1) + 1e-12:
        raise ValueError(f"weighted convolution needs 1/q <= 1 - d2/(n-1), got q={q}, d2={d2}")
    return not endpoint


def check_weighted_convolution(
    family: FieldFamily, p: float, q: float, d1: float, d2: float, grid: Grid,
    refine: bool = True, angular_nodes: int = 32,
) -> RatioReport:
    gated = validate_weighted_convolution(grid.dim, p, q, d1, d2)
    exponent = grid.dim * _inverse(p) + d2
    kernels = KernelCache()

    def ratio(seed: int, g: Grid) -> float:
        return weighted_convolution_ratio(
            family.sample(seed, g), kernels.get(g, exponent), p, q, d1, d2, angular_nodes
        )

    def symmetry(seed: int) -> float:
        u = family.sample(seed, grid)
        base = weighted_convolution_ratio(u, kernels.get(grid, exponent), p, q, d1, d2, angular_nodes)
        stretched = grid.dilated(0.5)
        dilated = weighted_convolution_ratio(
            _on_grid(u, stretched), kernels.get(stretched, exponent), p, q, d1, d2, angular_nodes
        )
        return _relative_gap(dilated, base)

    notes = ["Lorentz norm L^{q,1} on the sphere replaced by L^q"]
    if not gated:
        notes.append("p = inf with d1 = d2: grid-maximum surrogate, reported only")
    return _report(
        InequalityId.WEIGHTED_CONVOLUTION, family, grid, ratio, symmetry,
        {'p': p, 'q': q, 'd1': d1, 'd2': d2}, refine, gated=gated, notes=notes,
    )


def probe_commutator(
    family: FieldFamily, alpha: float, grid: Grid,
    masses: Iterable[float] = DEFAULT_COMMUTATOR_MASSES, refine: bool = True,
) -> RatioReport:
    """Worst |<u, [D_m^{2-alpha}, |x|^2 K_alpha(|u|^2)] u>| / ||u||^4 over a radial family and m sweep."""
    masses = [float(m) for m in masses]
    if any(m <= 0 for m in masses):
        raise ValueError("commutator probe needs m > 0")
    if not alpha < grid.dim:
        raise ValueError(f"commutator probe needs gamma = alpha < n, got alpha={alpha}")
    kernels = KernelCache()
    sweep: Dict[str, float] = {}
    worst_mass = masses[0]
    worst_value = -np.inf
    for m in masses:
        value, _, _ = scan_family(
            family, grid, lambda seed, g, m=m: commutator_ratio(family.sample(seed, g), m, alpha, kernels.get(g, alpha))
        )
        sweep[f"m={m:g}"] = value
        if value > worst_value:
            worst_mass, worst_value = m, value

    def ratio(seed: int, g: Grid) -> float:
        return commutator_ratio(family.sample(seed, g), worst_mass, alpha, kernels.get(g, alpha))

    def symmetry(seed: int) -> float:
        u = family.sample(seed, grid)
        kernel = kernels.get(grid, alpha)
        base = commutator_ratio(u, worst_mass, alpha, kernel)
        return max(
            _relative_gap(commutator_ratio(1.7 * u, worst_mass, alpha, kernel), base),
            _relative_gap(commutator_ratio(np.exp(0.9j) * u, worst_mass, alpha, kernel), base),
        )

    # At alpha = 2 the multiplier D_m^0 is the identity and the commutator vanishes.
    identity_kernel = kernels.get(grid, 2.0 if 2.0 < grid.dim else alpha)
    identity_defect, _, _ = scan_family(
        family, grid, lambda seed, g: commutator_ratio(family.sample(seed, g), worst_mass, 2.0, identity_kernel)
    )

    finite = [v for v in sweep.values() if v > 0]
    spread = max(finite) / min(finite) if finite else float('nan')
    return _report(
        InequalityId.COMMUTATOR, family, grid, ratio, symmetry,
        {'alpha': alpha, 'gamma': alpha, 'm': worst_mass, 'm_spread': spread, 'identity_defect': identity_defect},
        refine, notes=["m-sweep spread is reported, not gated"], sweep=sweep,
    )


# Suite and regression freezing

SUITE = tuple(InequalityId)


def run_inequality_suite(
    grid: Grid,
    samples: int,
    seed: int = 0,
    suite: Union[str, Sequence[str]] = "all",
    refine: bool = True,
) -> List[RatioReport]:
    """Run the checkers with the default exponents for an n = 2 or 3 grid."""
    if grid.dim not in (2, 3):
        raise ValueError(f"the inequality suite runs on n = 2 or 3 grids, got n={grid.dim}")
    selected = list(SUITE) if suite == "all" else [InequalityId(s) for s in ([suite] if isinstance(suite, str) else suite)]
    n = grid.dim
    family = FieldFamily.for_grid(grid, samples=samples, first_seed=seed)
    reports: List[RatioReport] = []
    for inequality in selected:
        logger.info(f"Running inequality check {inequality.value}")
        if inequality == InequalityId.HARDY:
            reports.append(check_hardy(family, 1.0, grid, refine))
        elif inequality == InequalityId.KGAMMA_BOUND:
            reports.append(check_kgamma_bound(family, 1.0, 0.5, grid, refine))
        elif inequality == InequalityId.STEIN_WEISS:
            reports.append(check_stein_weiss(family, 0.5, n - 0.5, 2.0, grid, refine))
        elif inequality == InequalityId.LEIBNIZ:
            reports.append(check_leibniz(family, 0.5, HolderSplit.symmetric(2.0), grid, refine))
        elif inequality == InequalityId.WEIGHTED_CONVOLUTION:
            reports.append(check_weighted_convolution(family, 2.0, 2.0, 0.0, 0.25, grid, refine))
        else:
            radial = FieldFamily.for_grid(grid, samples=samples, first_seed=seed, radial=True)
            reports.append(probe_commutator(radial, 1.5, grid, refine=refine))
    return reports


def freeze_ratios(reports: Sequence[RatioReport], path: Union[str, Path]) -> Path:
    """Store worst ratios as a regression baseline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    baseline = {report.inequality_id.value: report.worst_ratio for report in reports}
    path.write_text(json.dumps(baseline, indent=2, sort_keys=True))
    logger.info(f"Froze {len(baseline)} inequality ratios to {path}")
    return path


def load_frozen_ratios(path: Union[str, Path]) -> Dict[str, float]:
    return {k: float(v) for k, v in json.loads(Path(path).read_text()).items()}


def find_regressions(
    reports: Sequence[RatioReport], baseline: Dict[str, float], slack: float = INEQUALITY_REGRESSION_SLACK
) -> List[str]:
    """Ids whose worst ratio grew by more than slack over the frozen value."""
    regressions = []
    for report in reports:
        frozen = baseline.get(report.inequality_id.value)
        if frozen is not None and report.gated and report.worst_ratio > frozen * (1.0 + slack):
            logger.warning(
                f"{report.inequality_id.value} worst ratio {report.worst_ratio:.6g} exceeds frozen {frozen:.6g}"
            )
            regressions.append(report.inequality_id.value)
    return regressions


def report_violations(report: RatioReport) -> List[str]:
    """Numerical acceptance failures of one gated report; empty when it passes.

    Checks a finite positive worst ratio, the refinement ratio band when a
    refinement was computed, the symmetry defect and, for the commutator, the
    vanishing identity case.
    """
    if not report.gated:
        return []
    name = report.inequality_id.value
    if not report.is_finite:
        return [f"{name}: worst ratio {report.worst_ratio} is not finite and positive"]
    violations = []
    low, high = REFINEMENT_RATIO_BOUNDS
    if report.refinement_ratio is not None and not low <= report.refinement_ratio <= high:
        violations.append(f"{name}: refinement ratio {report.refinement_ratio:.4g} outside [{low}, {high}]")
    if report.symmetry_defect is None or not report.symmetry_defect <= SYMMETRY_DEFECT_TOLERANCE:
        violations.append(f"{name}: symmetry defect {report.symmetry_defect} above {SYMMETRY_DEFECT_TOLERANCE:g}")
    identity_defect = report.params.get('identity_defect')
    if identity_defect is not None and not identity_defect <= COMMUTATOR_IDENTITY_TOLERANCE:
        violations.append(f"{name}: alpha = 2 commutator {identity_defect:.3e} above {COMMUTATOR_IDENTITY_TOLERANCE:g}")
    return violations
