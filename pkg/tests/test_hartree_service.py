"""
Tests for the Hartree kernel and nonlinearity.
"""

import pytest
import numpy as np

from src.models.errors import GridMismatchError
from src.models.hartree_models import PotentialSpec
from src.models.spectral_models import ComplexField, Grid, Space
from src.services.hartree_service import (
    build_kernel, convolve_values, hartree_potential, kernel_self_check, nonlinearity,
    potential_energy, riesz_constant, singular_cell_average
)

from conftest import gaussian, seeded_field


class TestPotentialSpec:
    """Test psi profiles."""

    def test_constant_profile(self):
        """Test the default profile psi = 1."""
        spec = PotentialSpec(gamma=1.0)

        assert spec.is_constant
        assert spec.psi_sup == 1.0
        np.testing.assert_allclose(spec.psi(np.array([0.0, 3.0])), [1.0, 1.0])
        np.testing.assert_allclose(spec.psi_prime(np.array([0.5])), [0.0])

    @pytest.mark.parametrize("kwargs", [
        {'gamma': 0.0},
        {'gamma': 1.0, 'lam': 2},
        {'gamma': 1.0, 'psi_constant': -1.0},
        {'gamma': 1.0, 'psi_radii': [0.0, 1.0]},
        {'gamma': 1.0, 'psi_radii': [0.5, 1.0], 'psi_values': [1.0, 0.5]},
        {'gamma': 1.0, 'psi_radii': [0.0, 1.0], 'psi_values': [1.0, -0.5]},
    ])
    def test_invalid_specs(self, kwargs):
        """Test invalid exponents, signs and tables are rejected."""
        with pytest.raises(ValueError):
            PotentialSpec(**kwargs)

    def test_table_from_csv(self, tmp_path):
        """Test a (rho, psi) table with a header row."""
        path = tmp_path / "psi.csv"
        path.write_text("rho,psi\n0,1.0\n1,0.5\n2,0.25\n")

        spec = PotentialSpec.from_csv(path, gamma=1.0, lam=-1)

        assert spec.lam == -1
        assert spec.psi_sup == 1.0
        np.testing.assert_allclose(spec.psi(np.array([0.5, 1.5, 5.0])), [0.75, 0.375, 0.25])
        np.testing.assert_allclose(spec.psi_prime(np.array([0.5, 1.5, 5.0])), [-0.5, -0.25, 0.0])

    def test_table_without_header(self, tmp_path):
        """Test a headerless table with a derivative column."""
        path = tmp_path / "psi.csv"
        path.write_text("0,2.0,0.0\n1,1.0,-1.0\n")

        spec = PotentialSpec.from_csv(path, gamma=0.5)

        assert spec.psi_derivative is not None
        assert spec.psi_sup == 2.0


class TestKernel:
    """Test kernel construction."""

    def test_riesz_constant_in_three_dimensions(self):
        """Test (|x|^-2)^ = 2 pi^2 / |xi| in three dimensions."""
        assert riesz_constant(3, 2.0) == pytest.approx(2.0 * np.pi ** 2)

    def test_singular_cell_average_one_dimension(self):
        """Test the origin cell average of |x|^-gamma against the closed form."""
        grid = Grid(1, 32, 8.0)
        gamma = 0.4
        half = 0.5 * grid.spacing

        assert singular_cell_average(grid, gamma) == pytest.approx(half ** (-gamma) / (1.0 - gamma), rel=1e-10)

    def test_singular_cell_average_exceeds_corner_value(self, grid_2d):
        """Test the averaged singular cell is larger than the kernel on its corners."""
        corner = (0.5 * np.sqrt(2.0) * grid_2d.spacing) ** -1.0

        assert singular_cell_average(grid_2d, 1.0) > corner

    def test_gamma_must_be_below_dimension(self, grid_1d):
        """Test gamma >= n is rejected."""
        with pytest.raises(ValueError):
            build_kernel(grid_1d, PotentialSpec(gamma=1.0))

    def test_convolution_of_a_point_mass(self, grid_1d, kernel_1d):
        """Test convolving a unit sample reproduces h |x - x0|^-gamma."""
        n = grid_1d.points_per_axis
        values = np.zeros(grid_1d.shape)
        values[n // 2] = 1.0

        result = convolve_values(values, kernel_1d).real
        distance = np.abs(grid_1d.axis)
        expected = np.empty_like(distance)
        nonzero = distance > 0
        expected[nonzero] = grid_1d.spacing * distance[nonzero] ** -0.5
        expected[~nonzero] = grid_1d.spacing * kernel_1d.singular_cell_value

        np.testing.assert_allclose(result, expected, rtol=1e-10, atol=1e-12)

    def test_convolution_is_not_periodic(self, grid_1d, kernel_1d):
        """Test mass at one edge does not wrap onto the other edge."""
        values = np.zeros(grid_1d.shape)
        values[0] = 1.0

        result = convolve_values(values, kernel_1d).real
        far = grid_1d.spacing * (grid_1d.axis[-1] - grid_1d.axis[0]) ** -0.5

        assert result[-1] == pytest.approx(far, rel=1e-10)

    @pytest.mark.slow
    def test_kernel_transform_self_check(self):
        """Test the kernel multiplier follows c |xi|^(gamma-n) inside the resolved band."""
        grid = Grid(2, 64, 8.0)
        kernel = build_kernel(grid, PotentialSpec(gamma=1.0))

        deviation = kernel_self_check(kernel)

        assert np.isfinite(deviation)
        assert deviation < 0.1


class TestNonlinearity:
    """Test K_gamma(|u|^2), F(u) and V(u)."""

    def test_potential_is_nonnegative(self, grid_2d, kernel_2d):
        """Test the Hartree potential is real and nonnegative."""
        u = seeded_field(grid_2d, seed=1)

        potential = hartree_potential(u, kernel_2d)

        assert potential.dtype.kind == 'f'
        assert np.all(potential >= 0)

    def test_trivial_kernel(self, gaussian_1d, zero_kernel_1d):
        """Test psi = 0 gives F(u) = 0 and V(u) = 0."""
        assert zero_kernel_1d.is_trivial
        np.testing.assert_array_equal(nonlinearity(gaussian_1d, zero_kernel_1d).values, 0.0)
        assert potential_energy(gaussian_1d, zero_kernel_1d) == 0.0

    def test_nonlinearity_sign(self, gaussian_1d, kernel_1d, focusing_kernel_1d):
        """Test lam flips the sign of F(u) and V(u)."""
        defocusing = nonlinearity(gaussian_1d, kernel_1d).values
        focusing = nonlinearity(gaussian_1d, focusing_kernel_1d).values

        np.testing.assert_allclose(focusing, -defocusing)
        assert potential_energy(gaussian_1d, kernel_1d) > 0
        assert potential_energy(gaussian_1d, focusing_kernel_1d) == pytest.approx(
            -potential_energy(gaussian_1d, kernel_1d)
        )

    def test_potential_energy_is_quartic(self, chirped_1d, kernel_1d):
        """Test V(c u) = |c|^4 V(u)."""
        base = potential_energy(chirped_1d, kernel_1d)

        assert potential_energy(chirped_1d * 2.0, kernel_1d) == pytest.approx(16.0 * base, rel=1e-12)

    def test_potential_energy_is_pairing(self, chirped_1d, kernel_1d):
        """Test V(u) = (1/4) <F(u), u>."""
        force = nonlinearity(chirped_1d, kernel_1d).values
        pairing = 0.25 * np.real(np.vdot(force, chirped_1d.values)) * chirped_1d.grid.cell_volume

        assert potential_energy(chirped_1d, kernel_1d) == pytest.approx(pairing, rel=1e-12)

    def test_grid_mismatch(self, kernel_1d):
        """Test fields on another grid are rejected."""
        other = gaussian(Grid(1, 32, 10.0))
        with pytest.raises(GridMismatchError):
            hartree_potential(other, kernel_1d)

    def test_frequency_field_rejected(self, gaussian_1d, kernel_1d):
        """Test the potential expects physical samples."""
        frequency = ComplexField(gaussian_1d.grid, gaussian_1d.values, Space.FREQUENCY)
        with pytest.raises(TypeError):
            hartree_potential(frequency, kernel_1d)
