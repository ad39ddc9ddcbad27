"""
Tests for the ground state solver.
"""

import pytest
import numpy as np
from hypothesis import given, settings, strategies as st

from src.models.spectral_models import Grid
from src.services.ground_state_service import (
    _normalize_sign, critical_mass_threshold, dilate_samples, euler_lagrange_residual, ground_state_profile,
    initial_guess, quotient_J, solve_ground_state, unit_kernel, weinstein_quotient
)
from src.services.spectral_service import l2_norm, mass_values

from conftest import gaussian


@pytest.fixture(scope="module")
def ground_state_1d():
    """Q for alpha = 2, gamma = 1/2 on a 1D grid."""
    return solve_ground_state(Grid(1, 128, 12.0), alpha=2.0, gamma=0.5, tol=1e-7)


class TestQuotient:
    """Test the scale-invariant quotient."""

    @settings(max_examples=20, deadline=None)
    @given(scale=st.floats(min_value=1e-2, max_value=1e2))
    def test_amplitude_invariance(self, scale):
        """Test W(c u) = W(u)."""
        grid = Grid(1, 32, 8.0)
        kernel = unit_kernel(grid, 0.5)
        u = gaussian(grid, width=1.3)

        assert weinstein_quotient(u * scale, 2.0, 0.5, kernel) == pytest.approx(
            weinstein_quotient(u, 2.0, 0.5, kernel), rel=1e-10
        )

    def test_initial_guess_has_unit_mass(self, grid_2d):
        assert mass_values(initial_guess(grid_2d), grid_2d) == pytest.approx(1.0)

    def test_dilation_by_one_keeps_samples(self, grid_1d, gaussian_1d):
        """Test u(1 * x) reproduces a band-limited profile."""
        np.testing.assert_allclose(dilate_samples(gaussian_1d.values, grid_1d, 1.0), gaussian_1d.values, atol=1e-12)

    def test_dilation_matches_closed_form(self, grid_1d, gaussian_1d):
        """Test u(b x) for a Gaussian."""
        result = dilate_samples(gaussian_1d.values, grid_1d, 1.5)

        np.testing.assert_allclose(result, np.exp(-0.5 * (1.5 * grid_1d.axis) ** 2), atol=1e-10)

    def test_phase_normalization_keeps_signs(self, grid_1d):
        """Test only the global phase is removed from a sign-changing profile."""
        profile = (1.0 - grid_1d.axis ** 2) * np.exp(-0.5 * grid_1d.axis ** 2)

        result = _normalize_sign(np.exp(0.7j) * profile)

        np.testing.assert_allclose(result, profile, atol=1e-12)
        assert np.min(result) < -0.1


class TestSolveGroundState:
    """Test the three-stage solver."""

    def test_converges(self, ground_state_1d):
        """Test the residual and the integral identities."""
        result = ground_state_1d

        assert result.converged
        assert result.residual < 1e-7
        assert result.pairing_defect < 1e-5
        assert result.pohozaev_defect < 5e-2
        assert result.mass > 0
        assert np.all(result.Q.values.real >= -1e-8 * np.max(result.Q.values.real))
        assert np.max(np.abs(result.Q.values.imag)) == 0.0

    def test_quotient_history_decreases(self, ground_state_1d):
        history = np.asarray(ground_state_1d.quotient_history)

        assert len(history) >= 2
        assert np.all(np.diff(history) < 0)

    def test_minimizes_quotient(self, ground_state_1d):
        """Test W(Q) does not exceed W of a Gaussian."""
        grid = ground_state_1d.Q.grid
        kernel = unit_kernel(grid, 0.5)

        assert ground_state_1d.quotient_value <= weinstein_quotient(gaussian(grid, width=2.0), 2.0, 0.5, kernel) * (1 + 1e-9)

    def test_residual_recomputes(self, ground_state_1d):
        grid = ground_state_1d.Q.grid
        residual = euler_lagrange_residual(ground_state_1d.Q, 2.0, unit_kernel(grid, 0.5))

        assert residual == pytest.approx(ground_state_1d.residual, rel=1e-10)

    def test_peak_at_origin(self, ground_state_1d):
        grid = ground_state_1d.Q.grid

        assert np.argmax(np.abs(ground_state_1d.Q.values)) == grid.points_per_axis // 2

    @pytest.mark.parametrize("alpha,gamma", [
        (1.0, 0.5),
        (2.5, 0.5),
        (2.0, 1.0),
    ])
    def test_invalid_exponents(self, grid_1d, alpha, gamma):
        """Test alpha outside (1, 2] and gamma outside (0, min(n, 2 alpha)) are rejected."""
        with pytest.raises(ValueError):
            solve_ground_state(grid_1d, alpha, gamma)

    @pytest.mark.slow
    def test_mass_critical_quotient(self):
        """Test W(Q) = 2 ||Q||^2 when gamma = alpha."""
        result = solve_ground_state(Grid(2, 64, 12.0), alpha=1.5, gamma=1.5, tol=1e-7)

        assert result.is_mass_critical
        assert result.critical_quotient_gap < 5e-2


class TestThresholds:
    """Test threshold masses and rescaled profiles."""

    def test_threshold(self, ground_state_1d):
        assert critical_mass_threshold(ground_state_1d, 1.0) == pytest.approx(ground_state_1d.l2_norm)
        assert critical_mass_threshold(ground_state_1d, 4.0) == pytest.approx(0.5 * ground_state_1d.l2_norm)
        with pytest.raises(ValueError):
            critical_mass_threshold(ground_state_1d, 0.0)

    def test_profile_mass(self, ground_state_1d):
        profile = ground_state_profile(ground_state_1d, 3.0)

        assert l2_norm(profile) ** 2 == pytest.approx(3.0)
        with pytest.raises(ValueError):
            ground_state_profile(ground_state_1d, 0.0)

    def test_quotient_j_range(self, grid_2d, gaussian_2d):
        """Test J is defined only for alpha < gamma < min(2 alpha, n)."""
        kernel = unit_kernel(grid_2d, 1.5)

        assert quotient_J(gaussian_2d, 1.0, 1.5, kernel) > 0
        with pytest.raises(ValueError):
            quotient_J(gaussian_2d, 1.5, 1.5, kernel)
