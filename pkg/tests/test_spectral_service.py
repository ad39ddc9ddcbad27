"""
Tests for the spectral substrate.
"""

import pytest
import numpy as np
from hypothesis import given, settings, strategies as st

from src.models.errors import GridMismatchError
from src.models.spectral_models import ComplexField, Grid, SobolevVariant, Space, SymbolKind
from src.services.spectral_service import (
    apply_symbol, build_grid, build_symbol, check_same_grid, forward_values, frequency_integral,
    homogeneous_symbol, inner_product, interpolate_to_grid, inverse_transform, l2_norm,
    lebesgue_norm_values, nonrelativistic_symbol, relativistic_symbol, shifted_relativistic_symbol,
    sobolev_norm, spectral_power, transform
)

from conftest import gaussian, seeded_field


class TestGrid:
    """Test grid construction and geometry."""

    def test_grid_geometry(self):
        """Test spacing, volumes and the first sample at -L."""
        grid = build_grid(2, 16, 4.0)

        assert grid.shape == (16, 16)
        assert grid.spacing == pytest.approx(0.5)
        assert grid.cell_volume == pytest.approx(0.25)
        assert grid.axis[0] == pytest.approx(-4.0)
        assert grid.axis[-1] == pytest.approx(3.5)
        assert grid.frequency_step == pytest.approx(np.pi / 4.0)

    def test_frequencies_are_in_fft_order(self, grid_1d):
        """Test wavenumbers start at zero and wrap to negative values."""
        k = grid_1d.axis_wavenumbers

        assert k[0] == 0.0
        assert k[grid_1d.points_per_axis // 2] < 0
        assert np.all(np.diff(grid_1d.frequencies) > 0)

    @pytest.mark.parametrize("dim,points,half_length", [
        (4, 16, 1.0),
        (1, 15, 1.0),
        (1, 4, 1.0),
        (1, 16, 0.0),
    ])
    def test_invalid_grid(self, dim, points, half_length):
        """Test invalid dimension, odd or tiny N and empty box are rejected."""
        with pytest.raises(ValueError):
            Grid(dim, points, half_length)

    def test_refined_and_dilated(self, grid_2d):
        """Test refined keeps the box and dilated keeps the lattice shape."""
        refined = grid_2d.refined()
        dilated = grid_2d.dilated(2.0)

        assert refined.half_length == grid_2d.half_length
        assert refined.points_per_axis == 2 * grid_2d.points_per_axis
        assert dilated.shape == grid_2d.shape
        assert dilated.half_length == pytest.approx(grid_2d.half_length / 2.0)

    def test_check_same_grid(self, grid_1d, grid_2d):
        """Test operands on different grids raise GridMismatchError."""
        check_same_grid(grid_1d, Grid(1, 64, 10.0))
        with pytest.raises(GridMismatchError):
            check_same_grid(grid_1d, grid_2d)


class TestTransforms:
    """Test the continuum Fourier convention."""

    def test_gaussian_transform(self, grid_1d, gaussian_1d):
        """Test exp(-x^2/2) maps to sqrt(2 pi) exp(-xi^2/2)."""
        hat = forward_values(gaussian_1d.values, grid_1d)
        expected = np.sqrt(2.0 * np.pi) * np.exp(-0.5 * grid_1d.axis_wavenumbers ** 2)

        np.testing.assert_allclose(hat, expected, atol=1e-10)

    def test_transform_space_flags(self, gaussian_1d):
        """Test transform and inverse_transform check and flip the space flag."""
        hat = transform(gaussian_1d)

        assert hat.space == Space.FREQUENCY
        with pytest.raises(TypeError):
            transform(hat)
        back = inverse_transform(hat)
        np.testing.assert_allclose(back.values, gaussian_1d.values, atol=1e-13)

    def test_parseval(self, grid_2d):
        """Test ||u||^2 = (2 pi)^-n int |u_hat|^2 on the lattice."""
        u = seeded_field(grid_2d, seed=3)

        physical = l2_norm(u) ** 2
        spectral = frequency_integral(spectral_power(u.values, grid_2d), grid_2d)

        assert spectral == pytest.approx(physical, rel=1e-12)

    def test_interpolation_keeps_samples(self, grid_1d, chirped_1d):
        """Test trigonometric interpolation reproduces the coarse samples."""
        fine = interpolate_to_grid(chirped_1d, grid_1d.refined())

        np.testing.assert_allclose(fine.values[::2], chirped_1d.values, atol=1e-12)

    def test_interpolation_rejects_other_box(self, gaussian_1d):
        """Test interpolation needs the same box."""
        with pytest.raises(GridMismatchError):
            interpolate_to_grid(gaussian_1d, Grid(1, 128, 5.0))


class TestSymbols:
    """Test dispersion symbols."""

    def test_zero_frequency_convention(self, grid_1d):
        """Test |xi|^s vanishes at xi = 0 for s != 0 and is 1 for s = 0."""
        assert homogeneous_symbol(grid_1d, 0.5).multiplier[0] == 0.0
        assert np.all(homogeneous_symbol(grid_1d, 0.0).multiplier == 1.0)
        assert relativistic_symbol(grid_1d, 2.0, 1.0).multiplier[0] == pytest.approx(2.0)

    def test_second_order_symbol_is_minus_laplacian(self, grid_1d, gaussian_1d):
        """Test |D|^2 exp(-x^2/2) = (1 - x^2) exp(-x^2/2)."""
        result = apply_symbol(gaussian_1d, homogeneous_symbol(grid_1d, 2.0))
        x = grid_1d.axis
        expected = (1.0 - x ** 2) * np.exp(-0.5 * x ** 2)

        np.testing.assert_allclose(result.values, expected, atol=1e-10)

    def test_shifted_symbol_matches_difference(self, grid_1d):
        """Test the cancellation-free shifted symbol equals (m^2+xi^2)^(a/2) - m^a."""
        m, alpha = 3.0, 1.5
        shifted = shifted_relativistic_symbol(grid_1d, m, alpha).multiplier
        direct = relativistic_symbol(grid_1d, m, alpha).multiplier - m ** alpha

        np.testing.assert_allclose(shifted, direct, rtol=1e-10, atol=1e-12)
        assert np.all(shifted >= 0)

    def test_nonrelativistic_symbol(self, grid_1d):
        """Test the large-mass symbol alpha/(2 m^(2-alpha)) |xi|^2."""
        symbol = nonrelativistic_symbol(grid_1d, 4.0, 1.5)

        np.testing.assert_allclose(symbol.multiplier, 1.5 / (2.0 * 4.0 ** 0.5) * grid_1d.xi_squared)
        with pytest.raises(ValueError):
            nonrelativistic_symbol(grid_1d, 0.0, 1.5)

    def test_build_symbol_dispatch(self, grid_1d):
        """Test build_symbol picks the requested family."""
        for kind in SymbolKind:
            symbol = build_symbol(grid_1d, kind, 1.0, 1.5)
            assert symbol.kind == kind
            assert not symbol.multiplier.flags.writeable

    def test_negative_mass_rejected(self, grid_1d):
        """Test negative masses raise ValueError."""
        with pytest.raises(ValueError):
            relativistic_symbol(grid_1d, -1.0, 1.0)


class TestNorms:
    """Test Sobolev and Lebesgue norms."""

    def test_sobolev_zero_is_l2(self, grid_2d):
        """Test ||u||_{H^0} = ||u||_{L^2}."""
        u = seeded_field(grid_2d, seed=5)

        assert sobolev_norm(u, 0.0) == pytest.approx(l2_norm(u), rel=1e-12)

    def test_massive_norm_needs_mass(self, gaussian_1d):
        """Test the massive variant requires a mass."""
        with pytest.raises(ValueError):
            sobolev_norm(gaussian_1d, 1.0, SobolevVariant.MASSIVE)

    def test_homogeneous_below_inhomogeneous(self, chirped_1d):
        """Test |xi|^s <= (1+|xi|^2)^(s/2) pointwise gives the norm ordering."""
        homogeneous = sobolev_norm(chirped_1d, 0.75, SobolevVariant.HOMOGENEOUS)
        inhomogeneous = sobolev_norm(chirped_1d, 0.75, SobolevVariant.INHOMOGENEOUS)

        assert homogeneous < inhomogeneous

    def test_inner_product_is_mass(self, chirped_1d):
        """Test <u, u> = ||u||^2."""
        value = inner_product(chirped_1d, chirped_1d)

        assert value.imag == pytest.approx(0.0, abs=1e-14)
        assert value.real == pytest.approx(l2_norm(chirped_1d) ** 2)

    def test_lebesgue_norms(self, grid_1d, gaussian_1d):
        """Test L^inf is the grid maximum and L^2 matches l2_norm."""
        assert lebesgue_norm_values(gaussian_1d.values, grid_1d, np.inf) == pytest.approx(1.0)
        assert lebesgue_norm_values(gaussian_1d.values, grid_1d, 2.0) == pytest.approx(l2_norm(gaussian_1d))
        with pytest.raises(ValueError):
            lebesgue_norm_values(gaussian_1d.values, grid_1d, 0.0)

    @settings(max_examples=25, deadline=None)
    @given(
        scale=st.floats(min_value=1e-3, max_value=1e3),
        s=st.floats(min_value=0.0, max_value=2.0),
    )
    def test_sobolev_norm_is_homogeneous(self, scale, s):
        """Test ||c u||_{H^s} = |c| ||u||_{H^s}."""
        grid = Grid(1, 32, 6.0)
        u = gaussian(grid, width=0.8, chirp=0.2)

        assert sobolev_norm(u * scale, s) == pytest.approx(scale * sobolev_norm(u, s), rel=1e-10)

    def test_field_shape_checked(self, grid_1d):
        """Test ComplexField rejects samples of the wrong shape."""
        with pytest.raises(ValueError):
            ComplexField(grid_1d, np.zeros(10))
