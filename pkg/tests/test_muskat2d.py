"""
Test module for the 2-D interface right-hand side and the velocity probe.

Tests on 64 x 64 grids carry the slow marker.
"""

import os
import sys
import math

import numpy as np
import pytest

# Add src directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.core.fields import (
    PhysParams, field_from_function, grid_mean, make_field, make_grid, make_grid_2d
)
from src.core.muskat2d import (
    Quadrature2DConfig, SingularRule2D, format_samples, parse_points, radial_window,
    reduce_consistency, rhs_2d, rhs_2d_at_extremum, smoothstep, velocity_at_extremum,
    velocity_field
)
from src.utils.errors import (
    ConfigParseError, ConfigurationError, DomainViolationError, PreconditionError
)

POLAR = Quadrature2DConfig(singular_rule=SingularRule2D.POLAR_PATCH)


def single_mode(n, k1, k2, eps=1e-5):
    grid = make_grid_2d(n)
    x1, x2 = grid.nodes()
    phase = np.cos(k1 * x1 + k2 * x2)
    return make_field(grid, eps * phase), -0.5 * math.hypot(k1, k2) * eps * phase


def relative_error(got, expected):
    return float(np.max(np.abs(got - expected)) / np.max(np.abs(expected)))


@pytest.mark.unit
class TestQuadratureConfig:
    """Settings validation and the smooth window."""

    def test_image_layer_range(self):
        with pytest.raises(ConfigurationError):
            Quadrature2DConfig(image_layers=5)

    def test_ring_minimum(self):
        with pytest.raises(ConfigurationError):
            Quadrature2DConfig(polar_patch_rings=3)

    def test_large_grid_guard(self, stable):
        big = make_field(make_grid_2d(128), np.zeros((128, 128)))
        with pytest.raises(ConfigurationError):
            rhs_2d(big, stable)

    def test_window_shape(self):
        assert smoothstep(0.0) == 0.0 and smoothstep(1.0) == 1.0
        assert smoothstep(0.5) == pytest.approx(0.5)
        np.testing.assert_allclose(radial_window([0.0, 0.3, 1.0]), [1.0, 1.0, 0.0])


@pytest.mark.unit
class TestRhs2D:
    """Right-hand side on the torus."""

    def test_zero_and_constant(self, grid2d, stable):
        assert np.all(rhs_2d(make_field(grid2d, np.zeros((32, 32))), stable, POLAR).samples == 0)
        flat = rhs_2d(make_field(grid2d, np.full((32, 32), 0.4)), stable, POLAR).samples
        np.testing.assert_allclose(flat, 0.0, atol=1e-14)

    def test_rejects_1d_field(self, cosine_field, stable):
        with pytest.raises(DomainViolationError):
            rhs_2d(cosine_field, stable)

    def test_coarse_linearization(self, stable):
        f, expected = single_mode(32, 1, 0)
        assert relative_error(rhs_2d(f, stable, POLAR).samples, expected) <= 0.1

    def test_mean_is_conserved(self, surface, stable):
        assert abs(grid_mean(rhs_2d(surface, stable, POLAR))) < 1e-6

    def test_crest_moves_down(self, surface, stable):
        assert rhs_2d(surface, stable, POLAR).samples[0, 0] < 0

    @pytest.mark.parametrize('cfg', [Quadrature2DConfig(), POLAR])
    def test_axis_swap_symmetry(self, grid2d, stable, cfg):
        x1, x2 = grid2d.nodes()
        f = make_field(grid2d, 0.1 * np.cos(x1) + 0.05 * np.sin(2 * x2)
                       + 0.03 * np.cos(x1 + 2 * x2 + 0.4))
        swapped = make_field(grid2d, f.samples.T)
        np.testing.assert_allclose(rhs_2d(swapped, stable, cfg).samples,
                                   rhs_2d(f, stable, cfg).samples.T, atol=1e-10)

    def test_extremum_term(self, surface, stable):
        full = rhs_2d(surface, stable, POLAR)
        peak = rhs_2d_at_extremum(surface, stable, POLAR)
        reference = full.samples[peak.index]
        assert peak.index == (0, 0)
        assert peak.value < 0
        assert abs(peak.value - reference) <= 0.1 * abs(reference)

    def test_extremum_of_constant(self, grid2d, stable):
        result = rhs_2d_at_extremum(make_field(grid2d, np.ones((32, 32))), stable)
        assert result.tie and result.value == 0.0

    def test_reduction_of_zero_profile(self, stable):
        f1d = make_field(make_grid(32), np.zeros(32))
        assert reduce_consistency(f1d, stable, POLAR)['l_inf_gap'] == 0.0

    def test_reduction_needs_periodic_profile(self, line_grid, stable):
        x = line_grid.nodes()
        with pytest.raises(DomainViolationError):
            reduce_consistency(make_field(line_grid, np.exp(-x * x)), stable, POLAR)

    def test_coarse_reduction(self, stable):
        f1d = field_from_function(make_grid(32), lambda x: 0.2 * np.cos(x))
        cfg = Quadrature2DConfig(image_layers=2, singular_rule=SingularRule2D.POLAR_PATCH)
        result = reduce_consistency(f1d, stable, cfg)
        assert result['l_inf_gap'] <= 0.05 * result['rhs_1d_linf']


@pytest.mark.slow
class TestRhs2DFullScale:
    """Single-mode linearization and reduction on 64 x 64."""

    @pytest.mark.parametrize('wavenumber', [(1, 0), (1, 1), (2, 1)])
    def test_linearization(self, stable, wavenumber):
        f, expected = single_mode(64, *wavenumber)
        assert relative_error(rhs_2d(f, stable, POLAR).samples, expected) <= 1e-2

    def test_refinement_improves(self, stable):
        coarse, expected_coarse = single_mode(32, 1, 0)
        fine, expected_fine = single_mode(64, 1, 0)
        assert relative_error(rhs_2d(fine, stable, POLAR).samples, expected_fine) < \
            relative_error(rhs_2d(coarse, stable, POLAR).samples, expected_coarse)

    def test_reduction(self, stable):
        f1d = field_from_function(make_grid(64), lambda x: 0.2 * np.cos(x))
        cfg = Quadrature2DConfig(image_layers=2, singular_rule=SingularRule2D.POLAR_PATCH)
        assert reduce_consistency(f1d, stable, cfg)['l_inf_gap'] < 1e-2

    def test_velocity_limit_matches_rhs(self, stable):
        f, _ = single_mode(64, 1, 0, eps=0.1)
        probe = velocity_at_extremum(f, stable, POLAR)
        reference = rhs_2d(f, stable, POLAR).samples[probe.index]
        assert abs(probe.limit - reference) <= 0.05 * abs(reference)


@pytest.mark.unit
class TestVelocity:
    """Velocity at points off the interface."""

    def test_flat_interface_is_at_rest(self, grid2d, stable):
        flat = make_field(grid2d, np.zeros((32, 32)))
        samples = velocity_field(flat, stable, [(0.0, 0.0, 1.0), (0.0, 0.0, -2.0)], POLAR)
        for sample in samples:
            np.testing.assert_allclose(sample.velocity, 0.0, atol=1e-12)

    def test_on_interface_point_rejected(self, surface, stable):
        with pytest.raises(PreconditionError):
            velocity_field(surface, stable, [(0.0, 0.0, 0.1)], POLAR)

    def test_far_field_decay(self, grid2d, stable):
        x1, _ = grid2d.nodes()
        f = make_field(grid2d, 0.1 * np.cos(x1))
        heights = [2.0, 4.0, 6.0, 8.0]
        samples = velocity_field(f, stable, [(0.0, 0.0, h) for h in heights], POLAR)
        speeds = [math.sqrt(sum(v * v for v in s.velocity)) for s in samples]
        assert all(a > b for a, b in zip(speeds, speeds[1:]))

    def test_degenerate_densities(self, surface):
        samples = velocity_field(surface, PhysParams(1.0, 1.0), [(0.0, 0.0, 2.0)])
        assert samples[0].velocity == (0.0, 0.0, 0.0)


@pytest.mark.unit
class TestPointsFormat:
    """Query point parsing and sample formatting."""

    def test_parse_points(self):
        text = "# probes\n0 0 1.5\n\n1.0 2.0 -3 # below\n"
        assert parse_points(text) == [(0.0, 0.0, 1.5), (1.0, 2.0, -3.0)]

    def test_bad_point_line(self):
        with pytest.raises(ConfigParseError) as info:
            parse_points("0 0 1\n0 1\n")
        assert info.value.line == 2

    def test_non_numeric_point(self):
        with pytest.raises(ConfigParseError) as info:
            parse_points("a b c\n")
        assert info.value.line == 1

    def test_format_samples(self, grid2d, stable):
        flat = make_field(grid2d, np.zeros((32, 32)))
        lines = format_samples(velocity_field(flat, stable, [(0.0, 0.0, 1.0)]))
        assert len(lines) == 1
        assert [float(v) for v in lines[0].split()][:3] == [0.0, 0.0, 1.0]
