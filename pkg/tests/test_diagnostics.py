"""
Test module for diagnostics, decay fits and verdicts.
"""

import os
import sys
import math

import numpy as np
import pytest

# Add src directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.core.diagnostics import (
    BoundKind, DecayModel, TimeSeriesRecord, Verdict, bound_constants, check_algebraic_bound,
    check_exponential_bound, check_extremum_rate, check_growth_rate, check_l1_conservation,
    check_max_principle, check_slope_bound, check_threshold, fit_decay, mode_amplitude, observe,
    parse_report_line, spectrum_tail, summarize
)
from src.core.fields import field_from_function, make_field
from src.core.timestepping import StepControl, integrate
from src.utils.errors import DiagnosticsError, PreconditionError


def record(t, linf, mean=0.0, fmin=None, max_slope=0.1, l1=1.0):
    return TimeSeriesRecord(t=t, linf=linf, l1=l1, mean=mean, fmax=linf,
                            fmin=-linf if fmin is None else fmin, max_slope=max_slope,
                            argmax_index=0, spectrum_tail=0.0)


def exponential_series(rate, linf0=0.1, count=21, t_end=2.0):
    return [record(t, linf0 * math.exp(-rate * t)) for t in np.linspace(0.0, t_end, count)]


@pytest.mark.unit
class TestVerdicts:
    """Report line formatting and parsing."""

    def test_report_line_round_trip(self):
        verdict = Verdict('max_principle', True, 1.5e-12, 0.0, 1e-9)
        line = verdict.report_line()
        assert line.startswith('CHECK max_principle PASS measured=')
        parsed = parse_report_line(line)
        assert parsed.passed and parsed.measured == 1.5e-12 and parsed.tolerance == 1e-9

    def test_failed_line(self):
        line = Verdict('slope_bound', False, 1.2, 1.0, 1e-6).report_line()
        assert ' FAIL ' in line
        assert not parse_report_line(line).passed

    def test_garbage_line(self):
        with pytest.raises(DiagnosticsError):
            parse_report_line('growth_rate looks fine')

    def test_summarize(self):
        good = Verdict('a', True, 0.0, 0.0, 0.0)
        bad = Verdict('b', False, 1.0, 0.0, 0.0)
        assert summarize([good, good])
        assert not summarize([good, bad])


@pytest.mark.unit
class TestObservation:
    """Records taken from fields."""

    def test_observe_cosine(self, cosine_field):
        result = observe(cosine_field, 0.25)
        assert result.t == 0.25
        assert result.fmax == pytest.approx(0.3)
        assert result.fmin == pytest.approx(-0.3)
        assert result.argmax_index == 0
        assert result.spectrum_tail == pytest.approx(0.0, abs=1e-25)

    def test_tail_of_high_mode(self, grid64):
        f = field_from_function(grid64, lambda x: np.cos(30 * x))
        assert spectrum_tail(f) == pytest.approx(1.0)

    def test_tail_of_zero(self, grid64):
        assert spectrum_tail(make_field(grid64, np.zeros(64))) == 0.0

    def test_mode_amplitude(self, cosine_field, surface):
        assert mode_amplitude(cosine_field, 1) == pytest.approx(0.3)
        assert mode_amplitude(surface, (1, 1)) == pytest.approx(0.05)


@pytest.mark.unit
class TestBoundConstants:

    def test_exponential_1d_constant(self):
        constants = bound_constants(0.1, 1.0, 1.0)
        expected = max(n / ((n * math.pi) ** 2 + 0.04) for n in range(1, 10))
        assert constants.exponential_1d == pytest.approx(expected, rel=1e-12)
        assert constants.exponential_1d == pytest.approx(0.100913, rel=1e-5)

    def test_integrated_algebraic_2d(self):
        constants = bound_constants(0.25, 2.0, 1.0)
        assert constants.algebraic_2d_integrated == pytest.approx(
            0.5 * constants.algebraic_2d * 0.5)
        assert constants.for_kind(BoundKind.ALGEBRAIC_2D) == constants.algebraic_2d_integrated
        assert constants.for_kind(BoundKind.ALGEBRAIC_1D) == constants.algebraic_1d

    def test_constants_scale_with_jump(self):
        one = bound_constants(0.1, 1.0, 1.0)
        two = bound_constants(0.1, 1.0, 2.0)
        assert two.exponential_2d == pytest.approx(2 * one.exponential_2d)
        assert two.algebraic_1d == pytest.approx(2 * one.algebraic_1d)

    def test_negative_norm(self):
        with pytest.raises(PreconditionError):
            bound_constants(-0.1, 1.0, 1.0)


@pytest.mark.unit
class TestChecks:
    """Pass and fail cases of each check on synthetic series."""

    def test_max_principle(self):
        assert check_max_principle(exponential_series(0.5)).passed
        rising = exponential_series(0.5)
        rising[5] = record(rising[5].t, 0.2)
        verdict = check_max_principle(rising)
        assert not verdict.passed
        assert verdict.measured > 0.05

    def test_exponential_bound(self):
        constants = bound_constants(0.1, 1.0, 1.0)
        c = constants.exponential_1d
        assert check_exponential_bound(exponential_series(1.2 * c), constants).passed
        assert not check_exponential_bound(exponential_series(0.5 * c), constants).passed

    def test_exponential_bound_needs_mean_zero(self):
        constants = bound_constants(0.1, 1.0, 1.0)
        series = [record(0.0, 0.1, mean=0.01)] + exponential_series(1.0)[1:]
        with pytest.raises(PreconditionError):
            check_exponential_bound(series, constants)

    def test_exponential_bound_skips_initial_record(self):
        constants = bound_constants(0.1, 1.0, 1.0)
        single = check_exponential_bound(exponential_series(1.0)[:1], constants)
        assert single.passed and single.measured == 1.0
        fast = check_exponential_bound(exponential_series(1.2 * constants.exponential_1d),
                                       constants)
        assert fast.passed and fast.measured < 1.0

    def test_extremum_rate_matches_forward_difference(self, cosine_field, stable):
        coarse = integrate(cosine_field, stable, StepControl(t_end=0.2, dt=0.01))
        verdict = check_extremum_rate(coarse, stable)
        assert verdict.passed and verdict.measured > 0.0
        assert not check_extremum_rate(coarse, stable, tolerance=1e-7).passed
        fine = integrate(cosine_field, stable, StepControl(t_end=0.2, dt=0.005))
        assert check_extremum_rate(fine, stable).measured < 0.7 * verdict.measured

    def test_exponential_bound_rejects_algebraic_kind(self):
        with pytest.raises(PreconditionError):
            check_exponential_bound(exponential_series(1.0), bound_constants(0.1, 1.0, 1.0),
                                    BoundKind.ALGEBRAIC_1D)

    def test_algebraic_bound(self):
        constants = bound_constants(0.1, 0.5, 1.0)
        c = constants.algebraic_1d
        fast = [record(t, 0.1 / (1 + 2 * c * t), fmin=0.0) for t in np.linspace(0, 5, 11)]
        slow = [record(t, 0.1 / (1 + 0.2 * c * t), fmin=0.0) for t in np.linspace(0, 50, 11)]
        assert check_algebraic_bound(fast, constants).passed
        assert not check_algebraic_bound(slow, constants).passed

    def test_algebraic_bound_needs_sign_definite(self):
        with pytest.raises(PreconditionError):
            check_algebraic_bound(exponential_series(1.0), bound_constants(0.1, 1.0, 1.0))

    def test_l1_conservation(self):
        steady = [record(t, 0.1, l1=2.0) for t in range(5)]
        drifting = [record(t, 0.1, l1=2.0 + 1e-3 * t) for t in range(5)]
        assert check_l1_conservation(steady).passed
        assert not check_l1_conservation(drifting).passed

    def test_slope_bound(self):
        falling = [record(t, 0.1, max_slope=0.9 - 0.1 * t) for t in range(5)]
        rising = [record(t, 0.1, max_slope=0.5 + 0.2 * t) for t in range(5)]
        assert check_slope_bound(falling).passed
        verdict = check_slope_bound(rising)
        assert not verdict.passed
        assert 'first_crossing_t=3' in verdict.notes

    def test_slope_bound_precondition(self):
        with pytest.raises(PreconditionError):
            check_slope_bound([record(0.0, 0.1, max_slope=1.0)])

    def test_empty_series(self):
        with pytest.raises(PreconditionError):
            check_max_principle([])

    def test_threshold_senses(self):
        assert check_threshold('gap', 0.5, 1.0).passed
        assert not check_threshold('gap', 1.5, 1.0).passed
        assert check_threshold('order', 4.0, 3.8, sense='ge').passed
        assert not check_threshold('order', 3.0, 3.8, sense='ge').passed
        assert not check_threshold('gap', float('nan'), 1.0).passed
        with pytest.raises(PreconditionError):
            check_threshold('gap', 0.5, 1.0, sense='lt')


@pytest.mark.unit
class TestFits:
    """Decay and growth fits."""

    def test_exponential_fit(self):
        fit = fit_decay(exponential_series(0.7))
        assert fit.rate == pytest.approx(0.7, rel=1e-10)
        assert fit.quality == pytest.approx(1.0)

    def test_algebraic_fits(self):
        times = np.linspace(0.0, 10.0, 20)
        p1 = fit_decay((times, 0.2 / (1 + 0.3 * times)), DecayModel.ALGEBRAIC_P1)
        p2 = fit_decay((times, 0.2 / (1 + 0.3 * times) ** 2), DecayModel.ALGEBRAIC_P2)
        assert p1.rate == pytest.approx(0.3, rel=1e-10)
        assert p2.rate == pytest.approx(0.3, rel=1e-10)

    def test_too_few_samples(self):
        with pytest.raises(DiagnosticsError):
            fit_decay(exponential_series(0.7, count=9))

    def test_non_positive_values(self):
        times = np.linspace(0.0, 1.0, 12)
        with pytest.raises(DiagnosticsError):
            fit_decay((times, np.zeros(12)))

    def test_growth_rate_window(self):
        times = np.linspace(0.0, 6.0, 61)
        amplitudes = 1e-6 * np.exp(2.0 * times)
        amplitudes[50:] = 0.05
        verdict = check_growth_rate(times, amplitudes, 2.0)
        assert verdict.passed
        assert verdict.measured == pytest.approx(2.0, rel=1e-9)
        assert int(verdict.notes.split('samples=')[1].split()[0]) == 47

    def test_growth_rate_mismatch(self):
        times = np.linspace(0.0, 1.0, 20)
        assert not check_growth_rate(times, 1e-6 * np.exp(times), 2.0).passed
