"""
Time integration of interface states.

Two fixed-step schemes are provided: classical RK4 on the full right-hand
side, and a Lawson integrating-factor RK4 that advances the linear part
-(rho_bar / 2) Lambda exactly through its Fourier multiplier and treats the
remainder explicitly. Step sizes are resolved once per run so that an
integer number of steps lands exactly on t_end.
"""

import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np

from .diagnostics import TimeSeriesRecord, observe
from .fields import (
    GridSpec2D, ScalarField, ScalarField2D, check_decay, lambda_op, linear_multiplier
)
from .muskat1d import Quadrature1DConfig, rhs_1d
from .muskat2d import Quadrature2DConfig, rhs_2d
from ..utils.errors import (
    ConfigurationError, IntegrationError, PreconditionError, UnsupportedSchemeError
)

logger = logging.getLogger(__name__)

AUTO = 'auto'
# Extent of the explicit RK4 stability region on the negative real axis
RK4_STABILITY = 2.785


class Scheme(Enum):
    RK4 = 'rk4'
    INTEGRATING_FACTOR = 'integrating_factor'


class RhsKind(Enum):
    NONLINEAR = 'nonlinear'
    LINEAR = 'linear'


class Termination(Enum):
    COMPLETED = 'completed'
    BLOWUP_GUARD = 'blowup_guard'
    STEP_LIMIT = 'step_limit'


@dataclass(frozen=True)
class StepControl:
    """
    Step-size and stopping settings.

    Attributes:
        t_end: Final time, nonnegative
        dt: Positive step or 'auto'
        cfl_safety: Fraction of the RK4 stability bound used by 'auto', in (0, 1]
        max_steps: Hard cap on the number of steps
        blowup_slope: Stop once the max slope exceeds this
        scheme: RK4 or IntegratingFactor
    """

    t_end: float
    dt: Union[float, str] = AUTO
    cfl_safety: float = 0.5
    max_steps: int = 100_000
    blowup_slope: float = 10.0
    scheme: Scheme = Scheme.RK4

    def __post_init__(self):
        if not (math.isfinite(self.t_end) and self.t_end >= 0):
            raise ConfigurationError(f"t_end must be a nonnegative real, got {self.t_end!r}")
        if self.dt != AUTO and not (isinstance(self.dt, (int, float)) and
                                    math.isfinite(self.dt) and self.dt > 0):
            raise ConfigurationError(f"dt must be positive or 'auto', got {self.dt!r}")
        if not 0 < self.cfl_safety <= 1:
            raise ConfigurationError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if self.max_steps < 1:
            raise ConfigurationError(f"max_steps must be positive, got {self.max_steps}")
        if not self.blowup_slope > 0:
            raise ConfigurationError(f"blowup_slope must be positive, got {self.blowup_slope}")
        if not isinstance(self.scheme, Scheme):
            raise ConfigurationError(f"unknown scheme {self.scheme!r}")

    def nominal_dt(self, grid, rho_bar: float) -> float:
        """The requested step, resolving 'auto' against the grid and rho_bar."""
        if self.dt != AUTO:
            return float(self.dt)
        if rho_bar == 0:
            return self.t_end / max(1, self.max_steps) if self.t_end > 0 else 1.0
        spacing = min(grid.spacing1, grid.spacing2) if isinstance(grid, GridSpec2D) \
            else grid.spacing
        return self.cfl_safety * RK4_STABILITY * 2.0 * spacing / (math.pi * abs(rho_bar))

    def resolve(self, grid, rho_bar: float):
        """
        Step count and step size for a run.

        Returns:
            tuple: (dt, steps) with steps * dt == t_end and dt no larger than nominal
        """
        nominal = self.nominal_dt(grid, rho_bar)
        if self.t_end == 0:
            return nominal, 0
        steps = max(1, int(math.ceil(self.t_end / nominal - 1e-9)))
        return self.t_end / steps, steps


@dataclass
class Trajectory:
    times: List[float] = field(default_factory=list)
    states: List[ScalarField] = field(default_factory=list)
    records: List[TimeSeriesRecord] = field(default_factory=list)
    termination: Termination = Termination.COMPLETED
    dt: float = 0.0

    def __len__(self):
        return len(self.times)

    @property
    def final_state(self) -> ScalarField:
        return self.states[-1]

    def append(self, t: float, state: Optional[ScalarField], record: TimeSeriesRecord):
        if self.times and not t > self.times[-1]:
            raise PreconditionError(f"trajectory times must increase, got {t} after {self.times[-1]}")
        self.times.append(t)
        if state is not None:
            self.states.append(state)
        self.records.append(record)


def _checked(values: np.ndarray, stage: int) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise IntegrationError("non-finite values in RK stage", stage=stage)
    return values


def step_rk4(state: ScalarField, rhs: Callable[[ScalarField], ScalarField],
             dt: float) -> ScalarField:
    """
    One classical RK4 step.

    Raises:
        IntegrationError: If a stage produces non-finite values
    """
    if not dt > 0:
        raise PreconditionError(f"dt must be positive, got {dt}")
    u = state.samples
    k1 = _checked(rhs(state).samples, 1)
    k2 = _checked(rhs(state.with_samples(_checked(u + 0.5 * dt * k1, 2))).samples, 2)
    k3 = _checked(rhs(state.with_samples(_checked(u + 0.5 * dt * k2, 3))).samples, 3)
    k4 = _checked(rhs(state.with_samples(_checked(u + dt * k3, 4))).samples, 4)
    return state.with_samples(_checked(u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), 4))


def _propagate(values: np.ndarray, multiplier: np.ndarray, two_d: bool) -> np.ndarray:
    if two_d:
        return np.fft.ifft2(np.fft.fft2(values) * multiplier).real
    return np.fft.ifft(np.fft.fft(values) * multiplier).real


def step_integrating_factor(state: ScalarField, remainder: Callable[[ScalarField], ScalarField],
                            params, dt: float) -> ScalarField:
    """
    One Lawson RK4 step in the variables exp((rho_bar / 2) Lambda t) f.

    Args:
        state: Current field on a periodic grid
        remainder: Evaluates rhs(f) + (rho_bar / 2) Lambda f
        params: Densities
        dt: Step

    Raises:
        UnsupportedSchemeError: On TruncatedLine grids
        IntegrationError: If a stage produces non-finite values
    """
    if not dt > 0:
        raise PreconditionError(f"dt must be positive, got {dt}")
    if not state.grid.is_periodic:
        raise UnsupportedSchemeError(
            "the integrating-factor scheme needs a periodic grid; use rk4 on a truncated line"
        )
    two_d = isinstance(state, ScalarField2D)
    half = linear_multiplier(state.grid, params.rho_bar, 0.5 * dt)
    full = linear_multiplier(state.grid, params.rho_bar, dt)
    u = state.samples

    a = _checked(remainder(state).samples, 1)
    u2 = _checked(_propagate(u + 0.5 * dt * a, half, two_d), 2)
    b = _checked(remainder(state.with_samples(u2)).samples, 2)
    u_half = _propagate(u, half, two_d)
    u3 = _checked(u_half + 0.5 * dt * b, 3)
    c = _checked(remainder(state.with_samples(u3)).samples, 3)
    u4 = _checked(_propagate(u, full, two_d) + dt * _propagate(c, half, two_d), 4)
    d = _checked(remainder(state.with_samples(u4)).samples, 4)
    update = _propagate(u, full, two_d) + (dt / 6.0) * (
        _propagate(a, full, two_d) + 2.0 * _propagate(b + c, half, two_d) + d
    )
    return state.with_samples(_checked(update, 4))


class Integrator:
    """
    Fixed-step integrator for one interface run.

    Observers registered for 'on_step' are called as observer(t, state, record)
    after every accepted step (and once for the initial state); 'on_finish'
    observers receive the finished trajectory. Observers must not modify the
    state.
    """

    def __init__(self, params, control: StepControl, rhs_kind: RhsKind = RhsKind.NONLINEAR,
                 quadrature_1d: Optional[Quadrature1DConfig] = None,
                 quadrature_2d: Optional[Quadrature2DConfig] = None):
        self.params = params
        self.control = control
        self.rhs_kind = rhs_kind
        self.quadrature_1d = quadrature_1d or Quadrature1DConfig()
        self.quadrature_2d = quadrature_2d or Quadrature2DConfig()
        self._callbacks: Dict[str, List[Callable[..., Any]]] = {
            'on_step': [],
            'on_finish': []
        }

    def add_callback(self, event_type: str, callback: Callable[..., Any]) -> bool:
        """
        Register an observer.

        Args:
            event_type: 'on_step' or 'on_finish'
            callback: Observer

        Returns:
            bool: True if added, False if unknown event or already registered
        """
        if event_type not in self._callbacks:
            logger.error(f"Invalid event type: {event_type}")
            return False
        if callback not in self._callbacks[event_type]:
            self._callbacks[event_type].append(callback)
            logger.debug(f"Added callback for {event_type}: {getattr(callback, '__name__', callback)}")
            return True
        return False

    def remove_callback(self, event_type: str, callback: Callable[..., Any]) -> bool:
        if event_type not in self._callbacks:
            logger.error(f"Invalid event type: {event_type}")
            return False
        if callback in self._callbacks[event_type]:
            self._callbacks[event_type].remove(callback)
            return True
        return False

    def _trigger_callbacks(self, event_type: str, *args):
        for callback in self._callbacks.get(event_type, []):
            try:
                callback(*args)
            except Exception as e:
                logger.error(f"Error in callback {getattr(callback, '__name__', callback)}: {e}")

    def rhs(self, f: ScalarField) -> ScalarField:
        """The full right-hand side selected by rhs_kind."""
        if self.rhs_kind is RhsKind.LINEAR:
            return f.with_samples(-0.5 * self.params.rho_bar * lambda_op(f).samples)
        if isinstance(f, ScalarField2D):
            return rhs_2d(f, self.params, self.quadrature_2d)
        return rhs_1d(f, self.params, self.quadrature_1d, enforce_decay=False)

    def remainder(self, f: ScalarField) -> ScalarField:
        """rhs(f) minus its linear part -(rho_bar / 2) Lambda f."""
        if self.rhs_kind is RhsKind.LINEAR:
            return f.with_samples(np.zeros(f.grid.shape))
        full = self.rhs(f).samples
        return f.with_samples(full + 0.5 * self.params.rho_bar * lambda_op(f).samples)

    def step(self, state: ScalarField, dt: float) -> ScalarField:
        if self.control.scheme is Scheme.INTEGRATING_FACTOR:
            return step_integrating_factor(state, self.remainder, self.params, dt)
        return step_rk4(state, self.rhs, dt)

    def run(self, f0: ScalarField, store_states: bool = True) -> Trajectory:
        """
        Advance f0 to control.t_end.

        Args:
            f0: Initial field
            store_states: Keep every state in the trajectory (the final state is always kept)

        Returns:
            Trajectory: Times, states, records and termination reason

        Raises:
            IntegrationError: Annotated with the failing step and time
            UnsupportedSchemeError: Integrating factor on a TruncatedLine grid
        """
        control = self.control
        if control.scheme is Scheme.INTEGRATING_FACTOR and not f0.grid.is_periodic:
            raise UnsupportedSchemeError(
                "the integrating-factor scheme needs a periodic grid; use rk4 on a truncated line"
            )
        if not f0.grid.is_periodic:
            check_decay(f0)
        dt, steps = control.resolve(f0.grid, self.params.rho_bar)
        limited = steps > control.max_steps
        steps = min(steps, control.max_steps)
        logger.info(
            f"Integrating {f0.dimension}-D {self.rhs_kind.value} problem with "
            f"{control.scheme.value}: rho_bar={self.params.rho_bar:g}, dt={dt:.6g}, steps={steps}"
        )

        trajectory = Trajectory(dt=dt)
        record = observe(f0, 0.0)
        trajectory.append(0.0, f0, record)
        self._trigger_callbacks('on_step', 0.0, f0, record)

        state = f0
        termination = Termination.STEP_LIMIT if limited else Termination.COMPLETED
        for step in range(1, steps + 1):
            t_prev = (step - 1) * dt
            try:
                state = self.step(state, dt)
            except IntegrationError as e:
                raise e.annotate(t_prev, step) from e
            t = control.t_end if step == steps and not limited else step * dt
            record = observe(state, t)
            trajectory.append(t, state if store_states else None, record)
            logger.debug(f"step {step}: t={t:.6g} linf={record.linf:.6e} "
                         f"max_slope={record.max_slope:.6e}")
            self._trigger_callbacks('on_step', t, state, record)
            if record.max_slope > control.blowup_slope:
                termination = Termination.BLOWUP_GUARD
                break

        if not store_states and len(trajectory.times) > 1:
            trajectory.states.append(state)
        trajectory.termination = termination
        logger.info(f"Run finished: {termination.value} at t={trajectory.times[-1]:.6g} "
                    f"after {len(trajectory) - 1} steps")
        self._trigger_callbacks('on_finish', trajectory)
        return trajectory


def integrate(f0: ScalarField, params, control: StepControl,
              rhs_kind: RhsKind = RhsKind.NONLINEAR,
              observer: Optional[Callable[..., Any]] = None,
              quadrature_1d: Optional[Quadrature1DConfig] = None,
              quadrature_2d: Optional[Quadrature2DConfig] = None,
              store_states: bool = True) -> Trajectory:
    """Run an Integrator with an optional 'on_step' observer."""
    integrator = Integrator(params, control, rhs_kind, quadrature_1d, quadrature_2d)
    if observer is not None:
        integrator.add_callback('on_step', observer)
    return integrator.run(f0, store_states=store_states)


def measure_order(f0: ScalarField, params, rhs_kind: RhsKind, t_end: float, dt: float,
                  scheme: Scheme = Scheme.RK4,
                  quadrature_1d: Optional[Quadrature1DConfig] = None,
                  quadrature_2d: Optional[Quadrature2DConfig] = None) -> dict:
    """
    Self-convergence order from runs with dt, dt/2 and dt/4.

    Returns:
        dict: order (log2 of the ratio of successive sup differences),
            differences, and the step sizes used
    """
    finals = []
    steps = []
    for level in range(3):
        control = StepControl(t_end=t_end, dt=dt / 2 ** level, scheme=scheme)
        trajectory = integrate(f0, params, control, rhs_kind, quadrature_1d=quadrature_1d,
                               quadrature_2d=quadrature_2d, store_states=False)
        finals.append(trajectory.final_state.samples)
        steps.append(trajectory.dt)
    coarse = float(np.max(np.abs(finals[0] - finals[1])))
    fine = float(np.max(np.abs(finals[1] - finals[2])))
    if fine == 0.0 or coarse == 0.0:
        order = math.inf
    else:
        order = math.log2(coarse / fine)
    logger.info(f"Measured temporal order {order:.3f} (differences {coarse:.3e}, {fine:.3e})")
    return {'order': order, 'differences': (coarse, fine), 'dt': tuple(steps)}
