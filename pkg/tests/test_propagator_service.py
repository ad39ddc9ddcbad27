"""
Tests for the free flow, the Strang step and the evolve() driver.
"""

import pytest
import numpy as np

from src.models.evolution_models import EvolutionStatus, StepController, StepMode
from src.models.spectral_models import ComplexField, Grid, Space
from src.services.propagator_service import (
    _gamma_half_norm_from_fft, _kinetic_norm_from_fft, evolve, free_evolve, initial_state, phase_modulate,
    scale_field, strang_step
)
from src.services.spectral_service import (
    fft_values, homogeneous_symbol, l2_norm, relativistic_symbol, shifted_relativistic_symbol, sobolev_norm
)

from conftest import gaussian


class TestStepController:
    """Test step control validation."""

    def test_fixed_defaults(self):
        """Test the fixed controller observes every DEFAULT_OBSERVER_STRIDE steps."""
        controller = StepController.fixed(0.01)

        assert controller.mode == StepMode.FIXED
        assert controller.cadence == pytest.approx(0.1)

    def test_adaptive_defaults(self):
        """Test adaptive bounds default to dt/1024 and dt."""
        controller = StepController.adaptive(0.1, energy_tol=1e-6)

        assert controller.dt_min == pytest.approx(0.1 / 1024.0)
        assert controller.dt_max == pytest.approx(0.1)

    @pytest.mark.parametrize("kwargs", [
        {'dt': 0.0},
        {'dt': 0.1, 'blowup_threshold': 1.0},
        {'dt': 0.1, 'observer_interval': -1.0},
        {'dt': 0.1, 'mode': 'adaptive'},
        {'dt': 0.1, 'mode': 'adaptive', 'energy_tol': 1e-6, 'dt_min': 0.2},
    ])
    def test_invalid_controllers(self, kwargs):
        """Test nonpositive steps, thresholds and inconsistent adaptive bounds."""
        with pytest.raises(ValueError):
            StepController(**kwargs)


class TestFreeFlow:
    """Test the exact linear propagator."""

    def test_free_flow_is_unitary(self, grid_1d, chirped_1d):
        """Test U(t) preserves the L^2 norm."""
        symbol = relativistic_symbol(grid_1d, 1.0, 1.5)

        evolved = free_evolve(chirped_1d, 3.7, symbol)

        assert l2_norm(evolved) == pytest.approx(l2_norm(chirped_1d), rel=1e-13)

    def test_free_flow_group_property(self, grid_1d, chirped_1d):
        """Test U(t) U(s) = U(t + s)."""
        symbol = relativistic_symbol(grid_1d, 0.5, 1.2)

        twice = free_evolve(free_evolve(chirped_1d, 0.3, symbol), 0.4, symbol)
        once = free_evolve(chirped_1d, 0.7, symbol)

        np.testing.assert_allclose(twice.values, once.values, atol=1e-13)

    def test_schrodinger_gaussian(self, grid_1d, gaussian_1d):
        """Test the |xi|^2 flow of exp(-x^2/2) against the closed form."""
        t = 0.5
        evolved = free_evolve(gaussian_1d, t, homogeneous_symbol(grid_1d, 2.0))
        x = grid_1d.axis
        spread = 1.0 + 2.0j * t
        expected = spread ** -0.5 * np.exp(-0.5 * x ** 2 / spread)

        np.testing.assert_allclose(evolved.values, expected, atol=1e-10)

    def test_phase_modulation_links_symbols(self, grid_1d, chirped_1d):
        """Test exp(i t m^alpha) U_rel(t) = U_shifted(t)."""
        m, alpha, t = 2.0, 1.5, 0.9
        relativistic = free_evolve(chirped_1d, t, relativistic_symbol(grid_1d, m, alpha))
        shifted = free_evolve(chirped_1d, t, shifted_relativistic_symbol(grid_1d, m, alpha))

        modulated = phase_modulate(relativistic, t, m, alpha)

        np.testing.assert_allclose(modulated.values, shifted.values, atol=1e-12)

    def test_scale_field(self, grid_1d, gaussian_1d):
        """Test u_a keeps the samples, scales the amplitude and shrinks the box."""
        scaled = scale_field(gaussian_1d, 2.0, alpha=1.5, gamma=0.5)

        assert scaled.grid.half_length == pytest.approx(grid_1d.half_length / 2.0)
        np.testing.assert_allclose(scaled.values, 2.0 ** 1.0 * gaussian_1d.values)
        with pytest.raises(ValueError):
            scale_field(gaussian_1d, 0.0, alpha=1.5, gamma=0.5)


class TestStrangStep:
    """Test the split step."""

    def test_step_conserves_mass(self, grid_1d, chirped_1d, kernel_1d):
        """Test one step keeps ||u||^2 to rounding."""
        state = initial_state(chirped_1d, relativistic_symbol(grid_1d, 1.0, 1.5), kernel_1d, 0.05)

        stepped = strang_step(state, 0.05)

        assert l2_norm(stepped.u) == pytest.approx(l2_norm(chirped_1d), rel=1e-13)
        assert stepped.step_count == 1
        assert stepped.t == pytest.approx(0.05)
        assert stepped.h_gamma_half > 0

    def test_backward_step_undoes_forward_step(self, grid_1d, chirped_1d, kernel_1d):
        """Test a -dt step after a dt step returns the original samples."""
        state = initial_state(chirped_1d, relativistic_symbol(grid_1d, 1.0, 1.5), kernel_1d, 0.05)

        back = strang_step(strang_step(state, 0.05), -0.05)

        np.testing.assert_allclose(back.u.values, chirped_1d.values, atol=1e-12)

    def test_zero_step_rejected(self, grid_1d, chirped_1d, kernel_1d):
        """Test dt = 0 raises ValueError."""
        state = initial_state(chirped_1d, relativistic_symbol(grid_1d, 1.0, 1.5), kernel_1d, 0.05)
        with pytest.raises(ValueError):
            strang_step(state, 0.0)


class TestEvolve:
    """Test the evolve() driver."""

    def test_trivial_kernel_matches_free_flow(self, grid_1d, chirped_1d, zero_kernel_1d):
        """Test psi = 0 reproduces U(t) phi."""
        symbol = relativistic_symbol(grid_1d, 1.0, 1.5)
        state = initial_state(chirped_1d, symbol, zero_kernel_1d, 0.1)

        summary = evolve(state, 1.0, StepController.fixed(0.1))
        exact = free_evolve(chirped_1d, 1.0, symbol)

        assert summary.status == EvolutionStatus.COMPLETED
        np.testing.assert_allclose(summary.final_state.u.values, exact.values, atol=1e-12)

    def test_homogeneous_norm_is_tracked(self, grid_1d, chirped_1d, zero_kernel_1d):
        """Test the H_dot^{alpha/2} norm is recorded and stays fixed under the free flow."""
        alpha = 1.5
        state = initial_state(chirped_1d, relativistic_symbol(grid_1d, 1.0, alpha), zero_kernel_1d, 0.1)

        summary = evolve(state, 1.0, StepController.fixed(0.1))

        expected = sobolev_norm(chirped_1d, 0.5 * alpha, "homogeneous")
        assert summary.initial_hdot_norm == pytest.approx(expected, rel=1e-10)
        assert summary.final_state.hdot_alpha_half == pytest.approx(expected, rel=1e-10)
        assert summary.hdot_growth == pytest.approx(1.0, rel=1e-10)

    def test_growth_norm_scales_under_dilation(self):
        """Test the H_dot^{alpha/2} monitor sees the full b^{alpha/2} growth of an L^2-preserving dilation."""
        grid = Grid(1, 512, 40.0)
        alpha, gamma, b = 1.5, 1.5, 4.0
        phi = np.exp(-0.5 * grid.axis ** 2)
        dilated = np.sqrt(b) * np.exp(-0.5 * (b * grid.axis) ** 2)

        before, after = fft_values(phi), fft_values(dilated)
        homogeneous = _kinetic_norm_from_fft(after, grid, alpha) / _kinetic_norm_from_fft(before, grid, alpha)
        inhomogeneous = _gamma_half_norm_from_fft(after, grid, gamma) / _gamma_half_norm_from_fft(before, grid, gamma)

        assert homogeneous == pytest.approx(b ** (0.5 * alpha), rel=1e-6)
        assert inhomogeneous < homogeneous

    def test_observers_land_on_cadence(self, grid_1d, chirped_1d, kernel_1d):
        """Test observers fire at t0 and every observer_interval, including t_final."""
        times = []
        state = initial_state(chirped_1d, relativistic_symbol(grid_1d, 1.0, 1.5), kernel_1d, 0.03)

        evolve(state, 0.5, StepController.fixed(0.03, observer_interval=0.1), [lambda snap: times.append(snap.t)])

        np.testing.assert_allclose(times, [0.0, 0.1, 0.2, 0.3, 0.4, 0.5], atol=1e-12)

    def test_conservation(self, grid_1d, chirped_1d, kernel_1d):
        """Test mass is conserved to rounding and energy to the splitting error."""
        state = initial_state(chirped_1d, relativistic_symbol(grid_1d, 1.0, 1.5), kernel_1d, 0.01)

        summary = evolve(state, 1.0, StepController.fixed(0.01))

        assert summary.relative_mass_drift < 1e-12
        assert summary.relative_energy_drift < 1e-3

    def test_resume_is_bitwise(self, grid_1d, chirped_1d, kernel_1d):
        """Test stopping at an observation time and continuing reproduces the straight run."""
        symbol = relativistic_symbol(grid_1d, 1.0, 1.5)
        controller = StepController.fixed(0.03125, observer_interval=0.125)

        straight = evolve(initial_state(chirped_1d, symbol, kernel_1d, 0.03125), 1.0, controller)
        first = evolve(initial_state(chirped_1d, symbol, kernel_1d, 0.03125), 0.5, controller)
        resumed = evolve(first.final_state, 1.0, controller)

        assert resumed.t_end == straight.t_end
        np.testing.assert_array_equal(resumed.final_state.u.values, straight.final_state.u.values)

    def test_focusing_growth_is_flagged(self, grid_1d, focusing_kernel_1d):
        """Test the norm-growth criterion stops a strongly focusing run."""
        phi = gaussian(grid_1d, width=1.0, amplitude=3.0)
        state = initial_state(phi, relativistic_symbol(grid_1d, 1.0, 1.5), focusing_kernel_1d, 0.005)
        controller = StepController.fixed(0.005, blowup_threshold=1.001)

        summary = evolve(state, 2.0, controller)

        assert summary.status == EvolutionStatus.BLOWUP
        assert summary.blowup_time is not None
        assert summary.t_end < 2.0

    def test_adaptive_stall(self, grid_1d, chirped_1d, kernel_1d):
        """Test an unreachable energy tolerance drives dt below dt_min."""
        state = initial_state(chirped_1d, relativistic_symbol(grid_1d, 1.0, 1.5), kernel_1d, 0.1)
        controller = StepController.adaptive(0.1, energy_tol=1e-300, dt_min=0.01)

        summary = evolve(state, 1.0, controller)

        assert summary.status == EvolutionStatus.STALLED_NEAR_SINGULARITY
        assert summary.rejected_steps >= 4
        assert summary.t_end == 0.0

    def test_adaptive_completes(self, grid_1d, chirped_1d, kernel_1d):
        """Test a loose tolerance lets the adaptive run finish."""
        state = initial_state(chirped_1d, relativistic_symbol(grid_1d, 1.0, 1.5), kernel_1d, 0.05)

        summary = evolve(state, 1.0, StepController.adaptive(0.05, energy_tol=1e-2))

        assert summary.status == EvolutionStatus.COMPLETED
        assert summary.t_end == pytest.approx(1.0)

    def test_non_finite_values(self, grid_1d, kernel_1d):
        """Test NaN samples end the run with INSTABILITY."""
        values = np.full(grid_1d.shape, np.nan, dtype=np.complex128)
        state = initial_state(
            ComplexField(grid_1d, values, Space.PHYSICAL), relativistic_symbol(grid_1d, 1.0, 1.5), kernel_1d, 0.1
        )

        summary = evolve(state, 1.0, StepController.fixed(0.1))

        assert summary.status == EvolutionStatus.INSTABILITY

    def test_t_final_must_advance(self, grid_1d, chirped_1d, kernel_1d):
        """Test t_final <= t raises ValueError."""
        state = initial_state(chirped_1d, relativistic_symbol(grid_1d, 1.0, 1.5), kernel_1d, 0.1, t=1.0)
        with pytest.raises(ValueError):
            evolve(state, 1.0, StepController.fixed(0.1))
