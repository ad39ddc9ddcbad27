"""
Experiment service - runs the named experiments of an ExperimentConfig and
writes their CSV, JSON and checkpoint outputs plus a run manifest.

Runs inside a scan are independent; they execute in a process pool capped at
the configured worker count and are aggregated by label, so the order in which
they finish does not matter.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import psutil
from scipy import integrate
from loguru import logger

from ..config.config import FhnlsConfig, dump_experiment_config
from ..consts import (
    BLOWUP_ROOT_FACTOR, MASS_DRIFT_TOLERANCE, SCATTERING_STABILITY_TOLERANCE, STRICHARTZ_SATURATION_RATE,
    STRICHARTZ_SATURATION_START, SUB_THRESHOLD_GROWTH_LIMIT, VIRIAL_RESIDUAL_TOLERANCE
)
from ..models.errors import InsufficientSamplesError
from ..models.evolution_models import EvolutionStatus, StepController
from ..models.experiment_models import (
    ExperimentConfig, ExperimentKind, FromCheckpointData, GaussianData, GroundStateRescaledData,
    PlaneModulatedData, RunManifest, RunStatus, TimeConfig
)
from ..models.ground_state_models import GroundStateResult
from ..models.hartree_models import PotentialSpec
from ..models.observable_models import ObservableRecord, StrichartzAccumulator, VirialResidualReport
from ..models.spectral_models import ComplexField, Grid, Space, SymbolKind
from .checkpoint_service import CheckpointWriter, checkpoint_from_field, load_checkpoint, save_checkpoint
from .ground_state_service import (
    critical_mass_threshold, dilate_samples, ground_state_profile, solve_ground_state
)
from .hartree_service import build_kernel
from .inequality_service import (
    find_regressions, freeze_ratios, load_frozen_ratios, report_violations, run_inequality_suite
)
from .observables_service import (
    ObservableRecorder, dilation_virial, energy, is_admissible_pair, parabola_root, scattering_state,
    strichartz_norm, strichartz_value, virial_inequality_residuals, weighted_virial, write_observables_csv
)
from .propagator_service import evolve, free_evolve_values, initial_state
from .spectral_service import build_symbol, check_same_grid, l2_norm_values, sobolev_norm_values

PathLike = Union[str, Path]
TimedValues = Tuple[float, np.ndarray]

# Defect samples compared on the last quarter of a scattering run.
_SCATTERING_TAIL = 0.25


def default_workers() -> int:
    """Physical core count, at least 1."""
    return psutil.cpu_count(logical=False) or 1


@dataclass
class RunTask:
    """One evolution, self-contained so it can be shipped to a worker process."""
    label: str
    grid: Grid
    spec: PotentialSpec
    kind: SymbolKind
    mass: float
    alpha: float
    values: np.ndarray = field(repr=False)
    t_final: float
    controller: StepController
    t_start: float = 0.0
    keep_fields: bool = False
    keep_forcing: bool = False
    strichartz: Optional[Tuple[float, float, Optional[float]]] = None
    checkpoint_interval: Optional[float] = None
    checkpoint_dir: Optional[str] = None


@dataclass
class RunOutcome:
    label: str
    status: EvolutionStatus
    t_start: float
    t_end: float
    dt: float
    steps: int
    rejected_steps: int
    blowup_time: Optional[float]
    initial_norm: float
    peak_norm: float
    initial_hdot_norm: float
    peak_hdot_norm: float
    mass_drift: float
    energy_drift: float
    energy_initial: float
    message: str
    records: List[ObservableRecord] = field(default_factory=list, repr=False)
    final_values: Optional[np.ndarray] = field(default=None, repr=False)
    fields: List[TimedValues] = field(default_factory=list, repr=False)
    forcing: List[TimedValues] = field(default_factory=list, repr=False)
    strichartz_value: Optional[float] = None
    checkpoints: List[str] = field(default_factory=list)


def execute_run(task: RunTask) -> RunOutcome:
    """Evolve one task and collect its diagnostics; safe to call in a worker."""
    dispersion = build_symbol(task.grid, task.kind, task.mass, task.alpha)
    kernel = build_kernel(task.grid, task.spec)
    accumulators = []
    if task.strichartz is not None:
        q, r, s = task.strichartz
        accumulators.append(StrichartzAccumulator(q=q, r=r, sobolev_s=s))
    recorder = ObservableRecorder(
        dispersion, kernel, keep_fields=task.keep_fields, keep_forcing=task.keep_forcing,
        accumulators=accumulators,
    )
    observers: list = [recorder]
    writer = None
    if task.checkpoint_interval and task.checkpoint_dir:
        writer = CheckpointWriter(
            task.checkpoint_dir, task.checkpoint_interval, mass=task.mass, alpha=task.alpha,
            gamma=task.spec.gamma, lam=task.spec.lam, start=task.t_start,
        )
        observers.append(writer)

    u = ComplexField(task.grid, task.values, Space.PHYSICAL)
    state = initial_state(u, dispersion, kernel, task.controller.dt, t=task.t_start)
    summary = evolve(state, task.t_final, task.controller, observers)
    return RunOutcome(
        label=task.label,
        status=summary.status,
        t_start=task.t_start,
        t_end=summary.t_end,
        dt=summary.final_state.dt,
        steps=summary.steps,
        rejected_steps=summary.rejected_steps,
        blowup_time=summary.blowup_time,
        initial_norm=summary.initial_norm,
        peak_norm=summary.peak_norm,
        initial_hdot_norm=summary.initial_hdot_norm,
        peak_hdot_norm=summary.peak_hdot_norm,
        mass_drift=summary.relative_mass_drift,
        energy_drift=summary.relative_energy_drift,
        energy_initial=summary.energy_initial,
        message=summary.message,
        records=recorder.records,
        final_values=summary.final_state.u.values,
        fields=[(t, f.values) for t, f in recorder.fields],
        forcing=[(t, f.values) for t, f in recorder.forcing],
        strichartz_value=strichartz_value(accumulators[0]) if accumulators else None,
        checkpoints=[str(p) for p in writer.paths] if writer else [],
    )


# Initial data

def gaussian_values(
    grid: Grid, width: float, amplitude: float = 1.0, chirp: float = 0.0,
    center: Optional[Sequence[float]] = None, wavevector: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """amplitude exp(-|x-c|^2/(2 w^2)) exp(i chirp |x-c|^2) exp(i k.x)."""
    center = np.zeros(grid.dim) if center is None else np.asarray(center, dtype=float)
    offset = sum((x - c) ** 2 for x, c in zip(grid.coordinates, center))
    values = amplitude * np.exp(-0.5 * offset / width ** 2) * np.exp(1j * chirp * offset)
    if wavevector is not None:
        values = values * np.exp(1j * sum(k * x for k, x in zip(wavevector, grid.coordinates)))
    return values


def rescaled_profile(result: GroundStateResult, mass: float, concentration: float = 1.0) -> np.ndarray:
    """Q scaled to the given mass, then dilated by b keeping the L^2 norm."""
    values = ground_state_profile(result, mass).values
    if concentration != 1.0:
        grid = result.Q.grid
        values = concentration ** (0.5 * grid.dim) * dilate_samples(values, grid, concentration)
    return values


def admissible_exponent(q: float, dim: int) -> float:
    """r with 2/q + n/r = n/2."""
    denominator = 0.5 * dim - (0.0 if np.isinf(q) else 2.0 / q)
    return np.inf if denominator <= 0 else dim / denominator


def _timed_frame(fields: Sequence[TimedValues]) -> Dict[float, np.ndarray]:
    return {round(t, 12): values for t, values in fields}


def _max_gap(
    first: Sequence[TimedValues], second: Sequence[TimedValues], grid: Grid, s: float,
    transform: Optional[Callable[[float, np.ndarray], np.ndarray]] = None,
) -> float:
    """sup over shared observation times of ||first - second||_{H^s}."""
    other = _timed_frame(second)
    gaps = []
    for t, values in first:
        match = other.get(round(t, 12))
        if match is None:
            continue
        left = transform(t, values) if transform else values
        gaps.append(sobolev_norm_values(left - match, grid, s))
    return float(max(gaps)) if gaps else float('nan')


def _strictly_decreasing(values: Sequence[float]) -> bool:
    values = np.asarray(values, dtype=float)
    return bool(np.all(np.isfinite(values)) and np.all(np.diff(values) < 0))


def _finite(value: Optional[float]) -> bool:
    return value is not None and bool(np.isfinite(value))


def hdot_growth(outcome: RunOutcome) -> float:
    """Peak over initial ||u||_{H_dot^{alpha/2}} along a run."""
    if outcome.initial_hdot_norm == 0:
        return float('inf') if outcome.peak_hdot_norm > 0 else 1.0
    return outcome.peak_hdot_norm / outcome.initial_hdot_norm


def blowup_within_root(
    blowup_time: Optional[float], root: Optional[float], factor: float = BLOWUP_ROOT_FACTOR
) -> bool:
    """T*_num <= factor * r_m; False without a blowup time or a finite positive root."""
    if not _finite(blowup_time) or not _finite(root) or not root > 0:
        return False
    return bool(blowup_time <= factor * root)


def saturation_increment(times: np.ndarray, cumulative: np.ndarray, start: float) -> float:
    """Growth of the cumulative Strichartz integral per unit time over [start, T], relative to its final value."""
    window = np.flatnonzero(times >= start)
    if window.size < 2 or not times[-1] > times[window[0]]:
        return float('inf')
    if not cumulative[-1] > 0:
        return 0.0
    first = int(window[0])
    span = times[-1] - times[first]
    return float((cumulative[-1] - cumulative[first]) / (cumulative[-1] * span))


class ExperimentService:
    """Runs experiments and persists their results."""

    def __init__(self, config: Optional[FhnlsConfig] = None, workers: Optional[int] = None):
        self.config = config or FhnlsConfig()
        self.workers = workers or self.config.get_worker_cap() or default_workers()
        self.mass_tolerance = float(self.config.get('numerics.mass_tolerance', MASS_DRIFT_TOLERANCE))
        self._handlers = {
            ExperimentKind.EVOLVE: self._run_evolve,
            ExperimentKind.BLOWUP_SCAN: self._run_blowup_scan,
            ExperimentKind.MASS_THRESHOLD: self._run_mass_threshold,
            ExperimentKind.SCATTERING: self._run_scattering,
            ExperimentKind.LIMIT_M_TO_ZERO: self._run_limit_m_to_zero,
            ExperimentKind.LIMIT_M_TO_INFINITY: self._run_limit_m_to_infinity,
            ExperimentKind.GROUND_STATE: self._run_ground_state,
            ExperimentKind.INEQUALITIES: self._run_inequalities,
        }

    def run(self, config: ExperimentConfig, output_dir: Optional[PathLike] = None) -> RunManifest:
        """Execute the named experiment and write its outputs and manifest."""
        run_log = logger.bind(experiment=config.experiment.value, run_id=config.run_id)
        directory = Path(output_dir or config.output.directory) / config.run_id
        manifest = RunManifest(
            run_id=config.run_id,
            experiment=config.experiment,
            config_hash=config.config_hash(),
            started_at=datetime.now(timezone.utc),
        )
        outputs: List[Path] = []
        run_log.info(f"Starting experiment {config.experiment.value} in {directory}")
        try:
            directory.mkdir(parents=True, exist_ok=True)
            outputs.append(dump_experiment_config(config, directory / "config.yaml"))
            passed = self._handlers[config.experiment](config, directory, manifest.metrics, outputs)
            manifest.passed = passed
            manifest.status = RunStatus.FAILED if passed is False else RunStatus.COMPLETED
        except Exception as e:
            run_log.exception(f"Experiment {config.experiment.value} failed: {e}")
            manifest.status = RunStatus.ERROR
            manifest.error_message = str(e)

        manifest.finished_at = datetime.now(timezone.utc)
        manifest_path = directory / "manifest.json"
        manifest.outputs = [str(p) for p in outputs] + [str(manifest_path)]
        try:
            directory.mkdir(parents=True, exist_ok=True)
            manifest_path.write_text(manifest.model_dump_json(indent=2))
        except OSError as e:
            run_log.error(f"Could not write manifest {manifest_path}: {e}")
            manifest.outputs = manifest.outputs[:-1]
        run_log.info(
            f"Experiment {config.experiment.value} finished: status={manifest.status.value}, "
            f"passed={manifest.passed}"
        )
        return manifest

    def resume(
        self,
        checkpoint_path: PathLike,
        t_final: float,
        config: Optional[ExperimentConfig] = None,
        output_dir: Optional[PathLike] = None,
    ) -> RunManifest:
        """Continue an evolution from a checkpoint up to t_final.

        The checkpoint carries m, alpha, gamma and lam; psi and the dispersion
        kind come from config when given (defaults: psi = 1, relativistic).
        """
        data = load_checkpoint(checkpoint_path)
        if not t_final > data.t:
            raise ValueError(f"t_final must exceed the checkpoint time {data.t}, got {t_final}")
        grid_section = {
            'dim': data.grid.dim, 'points_per_axis': data.grid.points_per_axis,
            'half_length': data.grid.half_length,
        }
        physics = {'mass': data.mass, 'alpha': data.alpha, 'gamma': data.gamma, 'lam': data.lam}
        time = {'t_final': t_final, 'dt': data.dt}
        base: dict = {}
        if config is not None:
            base = config.model_dump(mode="json")
            physics = {**base['physics'], **physics}
            time = {**(base.get('time') or {}), **time}
        resumed = ExperimentConfig.model_validate({
            **base,
            'experiment': ExperimentKind.EVOLVE.value,
            'grid': grid_section,
            'physics': physics,
            'initial_data': {'kind': 'from_checkpoint', 'path': str(checkpoint_path)},
            'time': time,
        })
        logger.info(f"Resuming from {checkpoint_path} at t={data.t:.6g} to t={t_final:.6g}")
        return self.run(resumed, output_dir)

    # Shared plumbing

    def _execute_all(self, tasks: Sequence[RunTask]) -> Dict[str, RunOutcome]:
        workers = min(int(self.workers), len(tasks))
        if workers <= 1:
            return {task.label: execute_run(task) for task in tasks}
        logger.info(f"Running {len(tasks)} evolutions on {workers} worker processes")
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return {outcome.label: outcome for outcome in pool.map(execute_run, tasks)}

    @staticmethod
    def _task(
        config: ExperimentConfig, grid: Grid, values: np.ndarray, label: str,
        kind: Optional[SymbolKind] = None, mass: Optional[float] = None,
        controller: Optional[StepController] = None, **kwargs,
    ) -> RunTask:
        physics = config.physics
        return RunTask(
            label=label,
            grid=grid,
            spec=physics.potential_spec(),
            kind=kind or physics.dispersion,
            mass=physics.mass if mass is None else mass,
            alpha=physics.alpha,
            values=values,
            t_final=config.time.t_final,
            controller=controller or config.time.controller(),
            **kwargs,
        )

    @staticmethod
    def _fixed_controller(time: TimeConfig) -> StepController:
        if time.adaptive:
            logger.warning("Limit experiments compare runs at equal dt; adaptive stepping is ignored")
        return StepController.fixed(
            time.dt, blowup_threshold=time.blowup_threshold, observer_interval=time.observer_interval
        )

    @staticmethod
    def _ground_state(config: ExperimentConfig, grid: Grid) -> GroundStateResult:
        settings = config.ground_state
        return solve_ground_state(
            grid, config.physics.alpha, config.physics.gamma, tol=settings.tol,
            max_iter=settings.max_iter, polish_max_iter=settings.polish_max_iter,
        )

    def _initial_field(self, config: ExperimentConfig, grid: Grid) -> Tuple[ComplexField, float]:
        """phi and its start time."""
        data = config.initial_data
        if isinstance(data, GaussianData):
            values = gaussian_values(grid, data.width, data.amplitude, data.chirp, data.center)
        elif isinstance(data, PlaneModulatedData):
            values = gaussian_values(grid, data.width, data.amplitude, wavevector=data.wavevector)
        elif isinstance(data, FromCheckpointData):
            checkpoint = load_checkpoint(data.path)
            check_same_grid(grid, checkpoint.grid)
            return checkpoint.to_field(), checkpoint.t
        elif isinstance(data, GroundStateRescaledData):
            values = rescaled_profile(self._ground_state(config, grid), data.mass, data.concentration)
        else:
            raise ValueError(f"unknown initial_data kind {data.kind}")
        return ComplexField(grid, values, Space.PHYSICAL), 0.0

    def _write_final_checkpoint(
        self, config: ExperimentConfig, outcome: RunOutcome, grid: Grid, path: Path
    ) -> Path:
        physics = config.physics
        u = ComplexField(grid, outcome.final_values, Space.PHYSICAL)
        return save_checkpoint(
            path,
            checkpoint_from_field(
                u, physics.mass, physics.alpha, physics.gamma, physics.lam, t=outcome.t_end, dt=outcome.dt
            ),
        )

    @staticmethod
    def _virial_reports(
        outcomes: Dict[str, RunOutcome], energies: Dict[str, float], alpha: float, spec: PotentialSpec
    ) -> Dict[str, VirialResidualReport]:
        """Virial residuals of every run with enough samples on the cadence."""
        reports = {}
        for label, outcome in outcomes.items():
            try:
                reports[label] = virial_inequality_residuals(outcome.records, energies[label], alpha, spec)
            except InsufficientSamplesError as e:
                logger.debug(f"No virial residuals from run {label}: {e}")
        return reports

    @staticmethod
    def _calibrated_constant(reports: Dict[str, VirialResidualReport]) -> Optional[float]:
        """Largest fitted weighted-virial constant over the runs."""
        if not reports:
            return None
        return max(0.0, float(max(report.fitted_constant for report in reports.values())))

    @staticmethod
    def _virial_bounds_hold(
        outcomes: Dict[str, RunOutcome], reports: Dict[str, VirialResidualReport], metrics: dict
    ) -> bool:
        """Both virial bounds on every completed run.

        Runs stopped by blowup are reported only: their last cadence samples sit
        next to the singular time. A completed run without residuals fails.
        """
        violations = []
        for label, outcome in outcomes.items():
            if outcome.status != EvolutionStatus.COMPLETED:
                continue
            report = reports.get(label)
            if report is None:
                violations.append(f"{label}: too few cadence samples")
            elif not report.psi_nonincreasing:
                logger.warning(f"Virial bounds not gated for run {label}: psi is not nonincreasing")
            elif not report.dilation_bound_holds(VIRIAL_RESIDUAL_TOLERANCE):
                violations.append(f"{label}: dilation residual {report.max_dilation_residual:.4g}")
            elif not report.concavity_bound_holds(VIRIAL_RESIDUAL_TOLERANCE):
                violations.append(f"{label}: concavity residual {report.max_concavity_residual:.4g}")
        metrics['virial_violations'] = violations
        for violation in violations:
            logger.warning(f"Virial bound violated in run {violation}")
        return not violations

    # Experiments

    def _run_evolve(self, config: ExperimentConfig, directory: Path, metrics: dict, outputs: list) -> bool:
        grid = config.grid.build()
        phi, t_start = self._initial_field(config, grid)
        if not config.time.t_final > t_start:
            raise ValueError(f"time.t_final must exceed the start time {t_start}, got {config.time.t_final}")
        task = self._task(
            config, grid, phi.values, "evolve", t_start=t_start,
            checkpoint_interval=config.time.checkpoint_interval, checkpoint_dir=str(directory / "checkpoints"),
        )
        outcome = execute_run(task)
        outputs.append(write_observables_csv(outcome.records, directory / "observables.csv"))
        outputs.extend(Path(p) for p in outcome.checkpoints)
        if config.output.write_checkpoint:
            outputs.append(self._write_final_checkpoint(config, outcome, grid, directory / "final.chk"))

        metrics.update({
            'status': outcome.status.value,
            't_start': t_start,
            't_end': outcome.t_end,
            'steps': outcome.steps,
            'rejected_steps': outcome.rejected_steps,
            'blowup_time': outcome.blowup_time,
            'relative_mass_drift': outcome.mass_drift,
            'relative_energy_drift': outcome.energy_drift,
            'peak_norm_ratio': outcome.peak_norm / outcome.initial_norm if outcome.initial_norm else None,
        })
        if task.spec.psi_sup == 0:
            dispersion = build_symbol(grid, task.kind, task.mass, task.alpha)
            exact = free_evolve_values(phi.values, outcome.t_end - t_start, dispersion)
            metrics['free_flow_defect'] = l2_norm_values(outcome.final_values - exact, grid) / l2_norm_values(phi.values, grid)
        return outcome.status == EvolutionStatus.COMPLETED and outcome.mass_drift <= self.mass_tolerance

    def _scan_members(
        self, config: ExperimentConfig, grid: Grid, members: Dict[str, np.ndarray]
    ) -> Tuple[Dict[str, RunOutcome], Dict[str, dict]]:
        """Run each member and collect its initial virial data."""
        physics = config.physics
        spec = physics.potential_spec()
        dispersion = build_symbol(grid, physics.dispersion, physics.mass, physics.alpha)
        kernel = build_kernel(grid, spec)
        initial = {}
        for label, values in members.items():
            phi = ComplexField(grid, values, Space.PHYSICAL)
            initial[label] = {
                'energy': energy(phi, dispersion, kernel).energy,
                'dilation_virial': dilation_virial(phi),
                'weighted_virial': weighted_virial(phi, physics.mass, physics.alpha),
                'l2_norm': l2_norm_values(values, grid),
            }
        tasks = [self._task(config, grid, values, label) for label, values in members.items()]
        return self._execute_all(tasks), initial

    def _parabola_rows(
        self, outcomes: Dict[str, RunOutcome], initial: Dict[str, dict], alpha: float,
        reports: Dict[str, VirialResidualReport],
    ) -> Dict[str, dict]:
        constant = self._calibrated_constant(reports)
        rows = {}
        for label, outcome in outcomes.items():
            data = initial[label]
            root = None
            if constant is not None:
                root = parabola_root(
                    data['energy'], data['dilation_virial'], data['weighted_virial'], alpha, constant, data['l2_norm']
                )
            report = reports.get(label)
            rows[label] = {
                **data,
                'status': outcome.status.value,
                'blowup_time': outcome.blowup_time,
                't_end': outcome.t_end,
                'parabola_root': root,
                'hdot_growth': hdot_growth(outcome),
                'max_dilation_residual': report.max_dilation_residual if report else None,
                'max_concavity_residual': report.max_concavity_residual if report else None,
            }
        return rows

    def _run_blowup_scan(self, config: ExperimentConfig, directory: Path, metrics: dict, outputs: list) -> bool:
        grid = config.grid.build()
        physics = config.physics
        spec = physics.potential_spec()
        result = self._ground_state(config, grid)
        threshold = critical_mass_threshold(result, spec.psi_sup) ** 2
        sweep = config.sweep
        factors = sorted(sweep.mass_factors)
        members = {
            f"{factor:g}": rescaled_profile(result, factor * threshold, sweep.concentration if factor > 1 else 1.0)
            for factor in factors
        }
        outcomes, initial = self._scan_members(config, grid, members)
        energies = {label: data['energy'] for label, data in initial.items()}
        reports = self._virial_reports(outcomes, energies, physics.alpha, spec)
        constant = self._calibrated_constant(reports)
        rows = self._parabola_rows(outcomes, initial, physics.alpha, reports)

        table = pd.DataFrame([
            {'mass_factor': factor, 'mass': factor * threshold, **rows[f"{factor:g}"]} for factor in factors
        ])
        path = directory / "blowup_scan.csv"
        table.to_csv(path, index=False, float_format='%.17g')
        logger.info(f"Wrote blowup scan with {len(table)} members to {path}")
        outputs.append(path)

        smallest = table.iloc[0]
        negative = table[table['energy'] < 0]
        times = table.loc[table['status'] == EvolutionStatus.BLOWUP.value, 'blowup_time'].to_numpy(dtype=float)
        metrics.update({
            'threshold_mass': threshold,
            'ground_state_residual': result.residual,
            'calibrated_constant': constant,
            'smallest_mass_completed': bool(smallest['status'] == EvolutionStatus.COMPLETED.value),
            'blowup_time_nonincreasing': bool(np.all(np.diff(times) <= 0)),
        })
        passed = smallest['mass_factor'] >= 1 or metrics['smallest_mass_completed']
        if not negative.empty:
            largest = negative.iloc[-1]
            blew_up = largest['status'] == EvolutionStatus.BLOWUP.value
            within = blew_up and blowup_within_root(largest['blowup_time'], largest['parabola_root'])
            metrics['largest_negative_energy_blowup'] = bool(blew_up)
            metrics['blowup_within_twice_root'] = bool(within)
            passed = passed and within
        virial_ok = self._virial_bounds_hold(outcomes, reports, metrics)
        return bool(passed and virial_ok)

    def _run_mass_threshold(self, config: ExperimentConfig, directory: Path, metrics: dict, outputs: list) -> bool:
        grid = config.grid.build()
        physics = config.physics
        spec = physics.potential_spec()
        sweep = config.sweep
        result = self._ground_state(config, grid)
        threshold = critical_mass_threshold(result, spec.psi_sup) ** 2
        members = {
            'sub': rescaled_profile(result, sweep.sub_threshold_amplitude ** 2 * threshold),
            'super': rescaled_profile(result, sweep.super_threshold_amplitude ** 2 * threshold, sweep.concentration),
        }
        outcomes, initial = self._scan_members(config, grid, members)
        energies = {label: data['energy'] for label, data in initial.items()}
        reports = self._virial_reports(outcomes, energies, physics.alpha, spec)
        constant = self._calibrated_constant(reports)
        rows = self._parabola_rows(outcomes, initial, physics.alpha, reports)

        for label, outcome in outcomes.items():
            outputs.append(write_observables_csv(outcome.records, directory / f"observables_{label}.csv"))
        sub, sup = outcomes['sub'], outcomes['super']
        growth = hdot_growth(sub)
        sub_ok = sub.status == EvolutionStatus.COMPLETED and growth <= SUB_THRESHOLD_GROWTH_LIMIT
        negative_energy = rows['super']['energy'] < 0
        if not negative_energy:
            logger.warning(
                f"Super-threshold profile has E = {rows['super']['energy']:.4g} >= 0; raise the amplitude or concentration"
            )
        root = rows['super']['parabola_root']
        within = blowup_within_root(sup.blowup_time, root)
        super_ok = negative_energy and sup.status == EvolutionStatus.BLOWUP and within
        virial_ok = self._virial_bounds_hold(outcomes, reports, metrics)
        metrics.update({
            'threshold_mass': threshold,
            'ground_state_residual': result.residual,
            'calibrated_constant': constant,
            'sub_status': sub.status.value,
            'sub_norm_growth': growth,
            'super_status': sup.status.value,
            'super_energy': rows['super']['energy'],
            'super_blowup_time': sup.blowup_time,
            'super_parabola_root': root,
            'blowup_within_twice_root': within,
        })
        return bool(sub_ok and super_ok and virial_ok)

    def _run_scattering(self, config: ExperimentConfig, directory: Path, metrics: dict, outputs: list) -> bool:
        grid = config.grid.build()
        physics = config.physics
        phi, t_start = self._initial_field(config, grid)
        s = config.comparison_index
        q = config.sweep.strichartz_q
        r = config.sweep.strichartz_r or admissible_exponent(q, grid.dim)
        if not is_admissible_pair(q, r, grid.dim):
            raise ValueError(f"sweep.strichartz_q/r = ({q}, {r}) is not an admissible pair for n={grid.dim}")
        task = self._task(
            config, grid, phi.values, "scattering", t_start=t_start,
            keep_fields=True, keep_forcing=True, strichartz=(q, r, None),
        )
        outcome = execute_run(task)
        dispersion = build_symbol(grid, task.kind, task.mass, task.alpha)
        shift = lambda items: [(t - t_start, ComplexField(grid, v, Space.PHYSICAL)) for t, v in items]
        forcing = shift(outcome.forcing)
        solution = shift(outcome.fields)
        result = scattering_state(forcing, phi, dispersion, solution=solution, sobolev_s=s)
        half = [item for item in forcing if item[0] <= 0.5 * result.horizon]
        half_state = scattering_state(half, phi, dispersion, sobolev_s=s).asymptotic_state
        stability = (
            sobolev_norm_values(result.asymptotic_state.values - half_state.values, grid, s)
            / sobolev_norm_values(result.asymptotic_state.values, grid, s)
        )

        times = result.times
        norms = np.array([strichartz_norm(u, r) for _, u in solution])
        cumulative = integrate.cumulative_trapezoid(norms ** q, times, initial=0.0) if np.isfinite(q) else np.maximum.accumulate(norms)
        tail_start = (1.0 - _SCATTERING_TAIL) * times[-1]
        tail_defects = result.defects[times >= tail_start]
        tolerance = 1e-12 * max(1.0, float(np.max(result.defects)))
        defect_decreasing = bool(np.all(np.diff(tail_defects) <= tolerance))
        if times[-1] > STRICHARTZ_SATURATION_START:
            window_start = STRICHARTZ_SATURATION_START
        else:
            logger.warning(
                f"Run horizon {times[-1]:.4g} does not reach t={STRICHARTZ_SATURATION_START:g}; "
                f"Strichartz saturation is measured on the final quarter"
            )
            window_start = tail_start
        increment = saturation_increment(times, cumulative, window_start)
        saturated = increment < STRICHARTZ_SATURATION_RATE
        stable = bool(stability <= SCATTERING_STABILITY_TOLERANCE)

        frame = pd.DataFrame({'t': times + t_start, 'defect': result.defects, 'strichartz_cumulative': cumulative})
        path = directory / "scattering.csv"
        frame.to_csv(path, index=False, float_format='%.17g')
        outputs.append(path)
        outputs.append(write_observables_csv(outcome.records, directory / "observables.csv"))
        if config.output.write_checkpoint:
            outputs.append(save_checkpoint(
                directory / "scattering_state.chk",
                checkpoint_from_field(result.asymptotic_state, physics.mass, physics.alpha, physics.gamma, physics.lam),
            ))
        metrics.update({
            'status': outcome.status.value,
            'sobolev_s': s,
            'strichartz_q': q,
            'strichartz_r': r,
            'strichartz_norm': outcome.strichartz_value,
            'strichartz_window_start': float(window_start + t_start),
            'strichartz_tail_increment': increment,
            'strichartz_saturated': bool(saturated),
            'final_defect': result.final_defect,
            'tail_defect_decreasing': defect_decreasing,
            'asymptotic_state_stability': float(stability),
            'asymptotic_state_stable': stable,
        })
        return bool(outcome.status == EvolutionStatus.COMPLETED and defect_decreasing and saturated and stable)

    def _write_limit_table(self, directory: Path, name: str, rows: List[dict], outputs: list) -> None:
        path = directory / name
        pd.DataFrame(rows).to_csv(path, index=False, float_format='%.17g')
        logger.info(f"Wrote limit table {path}")
        outputs.append(path)

    def _run_limit_m_to_zero(self, config: ExperimentConfig, directory: Path, metrics: dict, outputs: list) -> bool:
        grid = config.grid.build()
        phi, _ = self._initial_field(config, grid)
        controller = self._fixed_controller(config.time)
        s = config.comparison_index
        tasks = [self._task(
            config, grid, phi.values, "reference", kind=SymbolKind.HOMOGENEOUS, mass=0.0,
            controller=controller, keep_fields=True,
        )]
        for m in config.sweep.masses:
            tasks.append(self._task(
                config, grid, phi.values, f"m={m:g}", kind=SymbolKind.RELATIVISTIC, mass=m,
                controller=controller, keep_fields=True,
            ))
        outcomes = self._execute_all(tasks)
        reference = outcomes['reference'].fields
        rows = []
        for m in config.sweep.masses:
            outcome = outcomes[f"m={m:g}"]
            rows.append({
                'm': m,
                'gap': _max_gap(outcome.fields, reference, grid, s),
                'status': outcome.status.value,
            })
        self._write_limit_table(directory, "limit_m_to_zero.csv", rows, outputs)
        gaps = [row['gap'] for row in rows]
        metrics.update({'sobolev_s': s, 'gaps': dict(zip([f"{m:g}" for m in config.sweep.masses], gaps))})
        metrics['strictly_decreasing'] = _strictly_decreasing(gaps)
        return metrics['strictly_decreasing']

    def _run_limit_m_to_infinity(self, config: ExperimentConfig, directory: Path, metrics: dict, outputs: list) -> bool:
        report = self.limit_experiment_m_to_infinity(config)
        self._write_limit_table(directory, "limit_m_to_infinity.csv", report['rows'], outputs)
        metrics.update({k: v for k, v in report.items() if k != 'rows'})
        return metrics['strictly_decreasing']

    def limit_experiment_m_to_infinity(self, config: ExperimentConfig) -> dict:
        """sup_t ||exp(i t m^alpha) u_m - w_m||_{H^s} per m, where u_m is relativistic and w_m
        nonrelativistic; the gap should decrease along the increasing m list."""
        masses = list(config.sweep.masses)
        if len(masses) < 2 or np.any(np.diff(masses) <= 0):
            raise ValueError(f"sweep.masses must be strictly increasing, got {masses}")
        grid = config.grid.build()
        alpha = config.physics.alpha
        phi, t_start = self._initial_field(config, grid)
        controller = self._fixed_controller(config.time)
        s = config.comparison_index
        tasks = []
        for m in masses:
            for kind in (SymbolKind.RELATIVISTIC, SymbolKind.NONRELATIVISTIC):
                tasks.append(self._task(
                    config, grid, phi.values, f"{kind.value}:{m:g}", kind=kind, mass=m,
                    controller=controller, keep_fields=True, t_start=t_start,
                ))
        outcomes = self._execute_all(tasks)
        rows = []
        for m in masses:
            relativistic = outcomes[f"{SymbolKind.RELATIVISTIC.value}:{m:g}"]
            nonrelativistic = outcomes[f"{SymbolKind.NONRELATIVISTIC.value}:{m:g}"]
            gap = _max_gap(
                relativistic.fields, nonrelativistic.fields, grid, s,
                transform=lambda t, values, m=m: np.exp(1j * (t - t_start) * m ** alpha) * values,
            )
            rows.append({
                'm': m, 'gap': gap,
                'relativistic_status': relativistic.status.value,
                'nonrelativistic_status': nonrelativistic.status.value,
            })
        gaps = [row['gap'] for row in rows]
        return {
            'rows': rows,
            'sobolev_s': s,
            'gaps': dict(zip([f"{m:g}" for m in masses], gaps)),
            'strictly_decreasing': _strictly_decreasing(gaps),
        }

    def _run_ground_state(self, config: ExperimentConfig, directory: Path, metrics: dict, outputs: list) -> bool:
        grid = config.grid.build()
        physics = config.physics
        result = self._ground_state(config, grid)
        metrics.update({
            'converged': result.converged,
            'residual': result.residual,
            'mass': result.mass,
            'l2_norm': result.l2_norm,
            'quotient_value': result.quotient_value,
            'iterations': result.iterations,
            'polish_iterations': result.polish_iterations,
            'pairing_defect': result.pairing_defect,
            'pohozaev_defect': result.pohozaev_defect,
            'critical_quotient_gap': result.critical_quotient_gap,
            'threshold_mass': critical_mass_threshold(result, physics.potential_spec().psi_sup) ** 2
            if physics.psi != "zero" else None,
            'message': result.message,
        })
        if config.output.write_checkpoint:
            outputs.append(save_checkpoint(
                directory / "ground_state.chk",
                checkpoint_from_field(result.Q, physics.mass, physics.alpha, physics.gamma, -1),
            ))
        return result.converged

    def _run_inequalities(self, config: ExperimentConfig, directory: Path, metrics: dict, outputs: list) -> bool:
        settings = config.inequalities
        grid = config.grid.build()
        reports = run_inequality_suite(grid, settings.samples, seed=config.seed, suite=settings.suite, refine=settings.refine)
        path = directory / "inequalities.json"
        path.write_text("[\n" + ",\n".join(report.model_dump_json(indent=2) for report in reports) + "\n]\n")
        logger.info(f"Wrote {len(reports)} inequality reports to {path}")
        outputs.append(path)

        regressions: List[str] = []
        if settings.freeze:
            outputs.append(freeze_ratios(reports, settings.baseline or directory / "inequality_baseline.json"))
        elif settings.baseline:
            regressions = find_regressions(reports, load_frozen_ratios(settings.baseline))
        finite = all(report.is_finite for report in reports if report.gated)
        violations = [message for report in reports for message in report_violations(report)]
        for message in violations:
            logger.warning(message)
        metrics.update({
            'worst_ratios': {report.inequality_id.value: report.worst_ratio for report in reports},
            'refinement_ratios': {report.inequality_id.value: report.refinement_ratio for report in reports},
            'symmetry_defects': {report.inequality_id.value: report.symmetry_defect for report in reports},
            'all_finite': finite,
            'regressions': regressions,
            'violations': violations,
        })
        return finite and not regressions and not violations
