"""
Tests for the experiment config and run manifest models.
"""

from datetime import datetime

import pytest
from pydantic import ValidationError

from src.models.evolution_models import StepMode
from src.models.experiment_models import (
    ExperimentConfig, ExperimentKind, FromCheckpointData, GaussianData, GroundStateRescaledData,
    PhysicsConfig, RunManifest, RunStatus, TimeConfig
)
from src.models.spectral_models import Grid, SymbolKind


def _config(**overrides) -> dict:
    data = {
        'experiment': 'evolve',
        'grid': {'dim': 1, 'points_per_axis': 64, 'half_length': 10.0},
        'physics': {'gamma': 0.5},
        'time': {'t_final': 1.0, 'dt': 0.01},
    }
    data.update(overrides)
    return data


class TestExperimentConfig:
    """Test parsing and cross-field validation."""

    def test_defaults(self):
        """Test a minimal evolve config fills every default section."""
        config = ExperimentConfig.model_validate(_config())

        assert config.schema_version == 1
        assert config.experiment == ExperimentKind.EVOLVE
        assert config.grid.build() == Grid(1, 64, 10.0)
        assert (config.physics.alpha, config.physics.gamma, config.physics.mass, config.physics.lam) == (1.5, 0.5, 1.0, 1)
        assert config.physics.dispersion == SymbolKind.RELATIVISTIC
        assert isinstance(config.initial_data, GaussianData)
        assert config.comparison_index == pytest.approx(0.25)

    def test_initial_data_discriminator(self):
        config = ExperimentConfig.model_validate(
            _config(initial_data={'kind': 'from_checkpoint', 'path': 'runs/state.chk'})
        )

        assert isinstance(config.initial_data, FromCheckpointData)
        assert config.initial_data.path == 'runs/state.chk'

    def test_unknown_fields_rejected(self):
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(_config(grids={'dim': 1}))
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(_config(physics={'alpha': 1.5, 'beta': 2.0}))

    def test_odd_grid_rejected(self):
        with pytest.raises(ValidationError, match="even"):
            ExperimentConfig.model_validate(_config(grid={'dim': 1, 'points_per_axis': 63, 'half_length': 10.0}))

    def test_time_required_for_evolution(self):
        data = _config()
        del data['time']
        with pytest.raises(ValidationError, match="time section"):
            ExperimentConfig.model_validate(data)

    def test_gamma_below_dimension(self):
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(_config(physics={'gamma': 1.0}))

    @pytest.mark.parametrize("physics", [
        {'alpha': 1.5, 'gamma': 1.0, 'lam': -1},
        {'alpha': 1.5, 'gamma': 1.5, 'lam': 1},
        {'alpha': 1.5, 'gamma': 1.5, 'lam': -1, 'mass': 0.0},
        {'alpha': 1.0, 'gamma': 1.0, 'lam': -1},
    ])
    def test_blowup_scan_preconditions(self, physics):
        """Test the scan needs a focusing mass-critical massive problem with 1 < alpha <= 2."""
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(_config(
                experiment='blowup_scan',
                grid={'dim': 2, 'points_per_axis': 32, 'half_length': 8.0},
                physics=physics,
            ))

    def test_blowup_scan_accepts_mass_critical(self):
        config = ExperimentConfig.model_validate(_config(
            experiment='blowup_scan',
            grid={'dim': 2, 'points_per_axis': 32, 'half_length': 8.0},
            physics={'alpha': 1.5, 'gamma': 1.5, 'lam': -1},
        ))

        assert config.sweep.mass_factors

    @pytest.mark.parametrize("experiment,masses", [
        ('limit_m_to_infinity', [4.0, 2.0, 1.0]),
        ('limit_m_to_zero', [1.0, 2.0]),
        ('limit_m_to_zero', [1.0]),
        ('limit_m_to_infinity', [0.0, 1.0]),
    ])
    def test_limit_mass_ordering(self, experiment, masses):
        """Test m -> infinity needs increasing and m -> 0 decreasing positive masses."""
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(_config(experiment=experiment, sweep={'masses': masses}))

    def test_inequalities_need_two_or_three_dimensions(self):
        with pytest.raises(ValidationError, match="grid.dim 2 or 3"):
            ExperimentConfig.model_validate({
                'experiment': 'inequalities',
                'grid': {'dim': 1, 'points_per_axis': 32, 'half_length': 8.0},
                'physics': {'gamma': 0.5},
            })

    def test_ground_state_rescaled_data_needs_valid_alpha(self):
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(_config(
                physics={'alpha': 0.8, 'gamma': 0.5},
                initial_data={'kind': 'ground_state_rescaled', 'mass': 1.0},
            ))
        config = ExperimentConfig.model_validate(_config(
            physics={'alpha': 2.0, 'gamma': 0.5},
            initial_data={'kind': 'ground_state_rescaled', 'mass': 1.0},
        ))
        assert isinstance(config.initial_data, GroundStateRescaledData)

    def test_center_length_matches_dimension(self):
        with pytest.raises(ValidationError, match="center"):
            ExperimentConfig.model_validate(_config(initial_data={'kind': 'gaussian', 'center': [0.0, 1.0]}))

    def test_hash_is_stable(self):
        """Test identical configs hash identically and any change alters the run id."""
        first = ExperimentConfig.model_validate(_config())
        again = ExperimentConfig.model_validate(_config())
        other = ExperimentConfig.model_validate(_config(seed=1))

        assert first.config_hash() == again.config_hash()
        assert first.run_id == again.run_id
        assert first.run_id.startswith("evolve-")
        assert len(first.run_id) == len("evolve-") + 12
        assert first.run_id != other.run_id


class TestSections:
    """Test the helper builders on config sections."""

    def test_potential_spec_choices(self, tmp_path):
        assert PhysicsConfig().potential_spec().psi_constant == 1.0
        assert PhysicsConfig(psi="zero").potential_spec().psi_constant == 0.0

        table = tmp_path / "psi.csv"
        table.write_text("0.0,1.0\n1.0,0.5\n2.0,0.25\n")
        spec = PhysicsConfig(psi=str(table), gamma=0.5).potential_spec()
        assert list(spec.psi_values) == [1.0, 0.5, 0.25]

    def test_nonrelativistic_needs_mass(self):
        with pytest.raises(ValidationError):
            PhysicsConfig(dispersion=SymbolKind.NONRELATIVISTIC, mass=0.0)

    def test_fixed_controller(self):
        controller = TimeConfig(t_final=1.0, dt=0.01, observer_interval=0.1).controller()

        assert controller.mode == StepMode.FIXED
        assert controller.cadence == pytest.approx(0.1)

    def test_adaptive_controller(self):
        controller = TimeConfig(t_final=1.0, dt=0.01, adaptive=True, energy_tol=1e-6).controller()

        assert controller.mode == StepMode.ADAPTIVE
        assert controller.energy_tol == 1e-6

    def test_adaptive_needs_tolerance(self):
        with pytest.raises(ValidationError, match="energy_tol"):
            TimeConfig(t_final=1.0, dt=0.01, adaptive=True)


class TestRunManifest:
    """Test the run manifest."""

    @pytest.mark.parametrize("status,passed,code", [
        (RunStatus.COMPLETED, None, 0),
        (RunStatus.COMPLETED, True, 0),
        (RunStatus.COMPLETED, False, 1),
        (RunStatus.FAILED, None, 1),
        (RunStatus.ERROR, None, 1),
    ])
    def test_exit_code(self, status, passed, code):
        manifest = RunManifest(
            run_id="evolve-abc", experiment=ExperimentKind.EVOLVE, config_hash="abc",
            started_at=datetime.now(), status=status, passed=passed,
        )

        assert manifest.exit_code == code

    def test_metrics_serialize_infinity(self):
        manifest = RunManifest(
            run_id="evolve-abc", experiment=ExperimentKind.EVOLVE, config_hash="abc",
            started_at=datetime.now(), metrics={'blowup_time': float('inf')},
        )

        assert 'Infinity' in manifest.model_dump_json()
