"""
Test module for the time integrators.
"""

import os
import sys
import math

import numpy as np
import pytest

# Add src directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.core.diagnostics import observe
from src.core.fields import field_from_function, linear_evolve, make_field
from src.core.timestepping import (
    AUTO, Integrator, RhsKind, Scheme, StepControl, Termination, Trajectory, integrate,
    measure_order, step_integrating_factor, step_rk4
)
from src.utils.errors import (
    ConfigurationError, IntegrationError, PreconditionError, UnsupportedSchemeError
)


@pytest.mark.unit
class TestStepControl:
    """Step size resolution."""

    @pytest.mark.parametrize('kwargs', [
        {'t_end': -1.0},
        {'t_end': 1.0, 'dt': 0.0},
        {'t_end': 1.0, 'dt': 'fast'},
        {'t_end': 1.0, 'cfl_safety': 1.5},
        {'t_end': 1.0, 'max_steps': 0},
        {'t_end': 1.0, 'blowup_slope': 0.0},
    ])
    def test_invalid_settings(self, kwargs):
        with pytest.raises(ConfigurationError):
            StepControl(**kwargs)

    def test_steps_land_on_t_end(self, grid64):
        dt, steps = StepControl(t_end=1.0, dt=0.3).resolve(grid64, 1.0)
        assert steps == 4
        assert dt == pytest.approx(0.25)

    def test_exact_multiple(self, grid64):
        dt, steps = StepControl(t_end=1.0, dt=0.1).resolve(grid64, 1.0)
        assert steps == 10

    def test_zero_horizon(self, grid64):
        assert StepControl(t_end=0.0).resolve(grid64, 1.0)[1] == 0

    def test_auto_step(self, grid64):
        control = StepControl(t_end=1.0, dt=AUTO, cfl_safety=0.5)
        expected = 0.5 * 2.785 * 2.0 * grid64.spacing / (math.pi * 2.0)
        assert control.nominal_dt(grid64, -2.0) == pytest.approx(expected)


@pytest.mark.unit
class TestSteppers:
    """Single steps of RK4 and the integrating-factor scheme."""

    def test_rk4_on_decay_ode(self, cosine_field):
        stepped = step_rk4(cosine_field, lambda f: f.with_samples(-f.samples), 0.1)
        np.testing.assert_allclose(stepped.samples, math.exp(-0.1) * cosine_field.samples,
                                   atol=1e-8)

    def test_rk4_overflow_is_reported(self, cosine_field):
        with pytest.raises(IntegrationError) as info:
            step_rk4(cosine_field, lambda f: f.with_samples(np.full(f.grid.n, 1e308)), 10.0)
        assert info.value.stage == 2

    def test_rk4_needs_positive_dt(self, cosine_field):
        with pytest.raises(PreconditionError):
            step_rk4(cosine_field, lambda f: f, 0.0)

    def test_integrating_factor_exact_on_linear_problem(self, grid64, stable):
        f0 = field_from_function(grid64, lambda x: 0.2 * np.cos(x) + 0.05 * np.sin(7 * x))
        zero = lambda f: f.with_samples(np.zeros(f.grid.n))
        stepped = step_integrating_factor(f0, zero, stable, 0.3)
        np.testing.assert_allclose(stepped.samples, linear_evolve(f0, 0.3, stable).samples,
                                   atol=1e-14)

    def test_integrating_factor_rejects_line(self, line_grid, stable):
        x = line_grid.nodes()
        f = make_field(line_grid, np.exp(-x * x))
        with pytest.raises(UnsupportedSchemeError):
            step_integrating_factor(f, lambda g: g, stable, 0.1)


@pytest.mark.unit
class TestTrajectory:

    def test_times_must_increase(self, cosine_field):
        trajectory = Trajectory()
        trajectory.append(0.0, cosine_field, observe(cosine_field, 0.0))
        with pytest.raises(PreconditionError):
            trajectory.append(0.0, cosine_field, observe(cosine_field, 0.0))


@pytest.mark.unit
class TestIntegrator:
    """Full runs with observers and termination reasons."""

    def test_run_completes_at_t_end(self, cosine_field, stable):
        trajectory = integrate(cosine_field, stable, StepControl(t_end=0.5))
        assert trajectory.termination is Termination.COMPLETED
        assert trajectory.times[-1] == 0.5
        assert len(trajectory.states) == len(trajectory.times) == len(trajectory.records)
        assert trajectory.records[-1].linf < trajectory.records[0].linf

    def test_mean_is_invariant(self, grid64, stable):
        x = grid64.nodes()
        f0 = make_field(grid64, 0.2 + 0.3 * np.cos(x) + 0.1 * np.sin(2 * x))
        trajectory = integrate(f0, stable, StepControl(t_end=5.0))
        drift = max(abs(r.mean - trajectory.records[0].mean) for r in trajectory.records)
        assert trajectory.records[0].mean == pytest.approx(0.2, abs=1e-14)
        assert drift < 1e-10

    def test_states_can_be_dropped(self, cosine_field, stable):
        trajectory = integrate(cosine_field, stable, StepControl(t_end=0.5), store_states=False)
        assert len(trajectory.states) == 2
        assert len(trajectory.records) == len(trajectory.times) > 2

    def test_observers(self, cosine_field, stable):
        integrator = Integrator(stable, StepControl(t_end=0.5, dt=0.1))
        seen, finished = [], []

        def on_step(t, state, record):
            seen.append(t)

        def broken(t, state, record):
            raise RuntimeError("observer failure")

        assert integrator.add_callback('on_step', on_step)
        assert not integrator.add_callback('on_step', on_step)
        assert not integrator.add_callback('on_tick', on_step)
        integrator.add_callback('on_step', broken)
        integrator.add_callback('on_finish', finished.append)
        trajectory = integrator.run(cosine_field)
        assert seen == trajectory.times
        assert finished == [trajectory]
        assert integrator.remove_callback('on_step', broken)

    def test_blowup_guard(self, cosine_field, unstable):
        control = StepControl(t_end=10.0, blowup_slope=0.35)
        trajectory = integrate(cosine_field, unstable, control)
        assert trajectory.termination is Termination.BLOWUP_GUARD
        assert trajectory.records[-1].max_slope > 0.35
        assert trajectory.times[-1] < 10.0

    def test_step_limit(self, cosine_field, stable):
        trajectory = integrate(cosine_field, stable, StepControl(t_end=1.0, dt=0.1, max_steps=3))
        assert trajectory.termination is Termination.STEP_LIMIT
        assert len(trajectory) == 4

    def test_line_rejects_integrating_factor(self, line_grid, stable):
        x = line_grid.nodes()
        f = make_field(line_grid, 0.1 * np.exp(-x * x))
        control = StepControl(t_end=0.1, scheme=Scheme.INTEGRATING_FACTOR)
        with pytest.raises(UnsupportedSchemeError):
            integrate(f, stable, control)

    def test_linear_run_matches_exact_solution(self, grid64, stable):
        f0 = field_from_function(grid64, lambda x: 0.2 * np.cos(x) + 0.01 * np.cos(20 * x))
        control = StepControl(t_end=1.0, dt=0.05, scheme=Scheme.INTEGRATING_FACTOR)
        final = integrate(f0, stable, control, RhsKind.LINEAR).final_state
        np.testing.assert_allclose(final.samples, linear_evolve(f0, 1.0, stable).samples,
                                   atol=1e-12)

    def test_integrating_factor_tracks_rk4(self, cosine_field, stable):
        rk4 = integrate(cosine_field, stable, StepControl(t_end=0.5, dt=0.01)).final_state
        lawson = integrate(cosine_field, stable,
                           StepControl(t_end=0.5, dt=0.01,
                                       scheme=Scheme.INTEGRATING_FACTOR)).final_state
        np.testing.assert_allclose(lawson.samples, rk4.samples, atol=1e-7)

    def test_rk4_order(self, cosine_field, stable):
        result = measure_order(cosine_field, stable, RhsKind.NONLINEAR, 0.1, 0.025)
        assert result['order'] >= 3.8
        assert result['dt'] == pytest.approx((0.025, 0.0125, 0.00625))
