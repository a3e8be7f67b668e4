"""
Per-step observation, decay fits and verdicts.

Each check compares a recorded series against one of the decay or
monotonicity bounds satisfied by solutions of the stable problem and returns
a Verdict. Verdicts serialize to one report line each:

    CHECK <name> PASS|FAIL measured=<v> bound=<b> tol=<t>
"""

import math
import re
import logging
from dataclasses import dataclass, asdict
from enum import Enum
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import linregress

from .fields import ScalarField, ScalarField2D, norms, transform
from .muskat1d import Quadrature1DConfig, locate_extremum, rhs_at_extremum
from .muskat2d import Quadrature2DConfig, rhs_2d_at_extremum
from ..utils.errors import DiagnosticsError, PreconditionError

logger = logging.getLogger(__name__)

MIN_FIT_SAMPLES = 10
MEAN_ZERO_TOLERANCE = 1e-10
SLOPE_MARGIN = 1e-3
# Largest mode index searched when maximizing the exponential-rate constants
MODE_SEARCH_LIMIT = 1_000_000

CSV_COLUMNS = ('t', 'linf', 'l1', 'mean', 'fmax', 'fmin', 'max_slope',
               'argmax_index', 'spectrum_tail')

_REPORT_PATTERN = re.compile(
    r'^CHECK (?P<name>\S+) (?P<status>PASS|FAIL) measured=(?P<measured>\S+) '
    r'bound=(?P<bound>\S+) tol=(?P<tol>\S+)$'
)


class BoundKind(Enum):
    EXPONENTIAL_1D = 'exponential_1d'
    EXPONENTIAL_2D = 'exponential_2d'
    ALGEBRAIC_1D = 'algebraic_1d'
    ALGEBRAIC_2D = 'algebraic_2d'


class DecayModel(Enum):
    EXPONENTIAL = 'exponential'
    ALGEBRAIC_P1 = 'algebraic_p1'
    ALGEBRAIC_P2 = 'algebraic_p2'


@dataclass(frozen=True)
class TimeSeriesRecord:
    """
    Diagnostics of one state.

    argmax_index is the flat (row-major) node index in 2-D. spectrum_tail is
    the energy fraction carried by the top third of the resolved modes.
    """

    t: float
    linf: float
    l1: float
    mean: float
    fmax: float
    fmin: float
    max_slope: float
    argmax_index: int
    spectrum_tail: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Verdict:
    check_name: str
    passed: bool
    measured: float
    bound: float
    tolerance: float
    notes: str = ''

    def report_line(self) -> str:
        status = 'PASS' if self.passed else 'FAIL'
        return (f"CHECK {self.check_name} {status} measured={self.measured:.17g} "
                f"bound={self.bound:.17g} tol={self.tolerance:.17g}")


@dataclass(frozen=True)
class BoundConstants:
    """
    Decay constants computed from the initial sup norm, L1 norm and rho_bar.

    algebraic_2d_integrated is the constant c' of the integrated form
    linf(t) <= linf(0) / (1 + c' t)^2 of d/dt linf <= -c linf^(3/2),
    namely c' = c sqrt(linf(0)) / 2.
    """

    exponential_1d: float
    algebraic_1d: float
    exponential_2d: float
    algebraic_2d: float
    algebraic_2d_integrated: float

    def for_kind(self, kind: BoundKind) -> float:
        if kind is BoundKind.ALGEBRAIC_2D:
            return self.algebraic_2d_integrated
        return getattr(self, kind.value)


@dataclass(frozen=True)
class DecayFit:
    rate: float
    quality: float
    model: DecayModel


def parse_report_line(text: str) -> Verdict:
    """Inverse of Verdict.report_line; notes are not carried."""
    match = _REPORT_PATTERN.match(text.strip())
    if not match:
        raise DiagnosticsError(f"not a verdict line: {text.strip()!r}")
    return Verdict(
        check_name=match.group('name'),
        passed=match.group('status') == 'PASS',
        measured=float(match.group('measured')),
        bound=float(match.group('bound')),
        tolerance=float(match.group('tol')),
    )


def spectrum_tail(f: ScalarField) -> float:
    """Fraction of spectral energy in modes beyond two thirds of the Nyquist index."""
    power = np.abs(transform(f).coefficients) ** 2
    total = float(np.sum(power))
    if total == 0.0:
        return 0.0
    if isinstance(f, ScalarField2D):
        i1 = np.abs(np.fft.fftfreq(f.grid.n1) * f.grid.n1)[:, None]
        i2 = np.abs(np.fft.fftfreq(f.grid.n2) * f.grid.n2)[None, :]
        tail = (i1 > f.grid.n1 / 3.0) | (i2 > f.grid.n2 / 3.0)
    else:
        tail = np.abs(np.fft.fftfreq(f.grid.n) * f.grid.n) > f.grid.n / 3.0
    return min(1.0, float(np.sum(power[np.broadcast_to(tail, power.shape)])) / total)


def observe(state: ScalarField, t: float) -> TimeSeriesRecord:
    """Record the norms, extremum location and spectrum tail of a state."""
    field_norms = norms(state)
    index, _ = locate_extremum(state.samples, 'max')
    return TimeSeriesRecord(
        t=float(t),
        linf=field_norms.linf,
        l1=field_norms.l1,
        mean=field_norms.mean,
        fmax=field_norms.max,
        fmin=field_norms.min,
        max_slope=field_norms.max_slope,
        argmax_index=index,
        spectrum_tail=spectrum_tail(state),
    )


def bound_constants(linf0: float, l1_0: float, rho_bar: float) -> BoundConstants:
    """
    Decay constants for initial data with sup norm linf0 and L1 norm l1_0.

    The exponential constants are maximized over the mode index n >= 1.
    """
    if linf0 < 0 or l1_0 < 0:
        raise PreconditionError("norms must be nonnegative")
    a2 = linf0 * linf0
    modes = np.arange(1, MODE_SEARCH_LIMIT + 1, dtype=float) * math.pi
    exponential_1d = rho_bar * float(np.max((2.0 * modes / math.tau) / (modes ** 2 + 4.0 * a2)))
    exponential_2d = rho_bar * float(np.max(
        (2.0 * modes) ** 2 / (4.0 * math.pi * (2.0 * modes ** 2 + 4.0 * a2) ** 1.5)
    ))
    denominator = l1_0 * l1_0 + 2.0 * l1_0 * a2 + 2.0 * a2 * a2
    algebraic_1d = rho_bar * l1_0 / (8.0 * math.pi * denominator) if denominator > 0 else 0.0
    algebraic_2d = rho_bar * 0.125 / (1.0 + 2.0 * l1_0 / math.pi + 4.0 * linf0 ** 3) ** 1.5
    return BoundConstants(
        exponential_1d=exponential_1d,
        algebraic_1d=algebraic_1d,
        exponential_2d=exponential_2d,
        algebraic_2d=algebraic_2d,
        algebraic_2d_integrated=0.5 * algebraic_2d * math.sqrt(linf0),
    )


def _require_series(series: Sequence[TimeSeriesRecord], name: str):
    if not series:
        raise PreconditionError(f"{name} needs a nonempty series")


def _max_increase(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return max(0.0, float(np.max(np.diff(values))))


def check_max_principle(series: Sequence[TimeSeriesRecord], tolerance: float = 1e-9,
                        name: str = 'max_principle') -> Verdict:
    """
    Pass iff linf, fmax are nonincreasing and fmin nondecreasing within tolerance per step,
    and linf never exceeds its initial value by more than tolerance.
    """
    _require_series(series, 'check_max_principle')
    linf = np.array([r.linf for r in series])
    fmax = np.array([r.fmax for r in series])
    fmin = np.array([r.fmin for r in series])
    linf_rise = _max_increase(linf)
    fmax_rise = _max_increase(fmax)
    fmin_drop = _max_increase(-fmin)
    overshoot = max(0.0, float(np.max(linf - linf[0])))
    measured = max(linf_rise, fmax_rise, fmin_drop, overshoot)
    notes = (f"linf_uptick={linf_rise:.3e} fmax_uptick={fmax_rise:.3e} "
             f"fmin_downtick={fmin_drop:.3e} overshoot={overshoot:.3e}")
    return Verdict(name, measured <= tolerance, measured, 0.0, tolerance, notes)


def _envelope_ratio(series, envelope) -> float:
    """Largest linf(t) / (linf(0) envelope(t)) over t > 0 (1 for a single record)."""
    linf0 = series[0].linf
    if linf0 == 0.0:
        return 0.0 if all(r.linf == 0.0 for r in series) else math.inf
    later = series[1:]
    if not later:
        return 1.0
    return max(r.linf / (linf0 * envelope(r.t)) for r in later)


def check_exponential_bound(series: Sequence[TimeSeriesRecord], constants: BoundConstants,
                            which: BoundKind = BoundKind.EXPONENTIAL_1D,
                            tolerance: float = 0.01) -> Verdict:
    """
    Pass iff linf(t) <= linf(0) exp(-c t) (1 + tolerance) at every record.

    Raises:
        PreconditionError: If the initial mean is not zero
    """
    _require_series(series, 'check_exponential_bound')
    if which not in (BoundKind.EXPONENTIAL_1D, BoundKind.EXPONENTIAL_2D):
        raise PreconditionError(f"{which.value} is not an exponential bound")
    if abs(series[0].mean) >= MEAN_ZERO_TOLERANCE:
        raise PreconditionError(
            f"exponential decay bound needs mean-zero data, got mean {series[0].mean:.3e}"
        )
    c = constants.for_kind(which)
    measured = _envelope_ratio(series, lambda t: math.exp(-c * t))
    return Verdict(f"{which.value}_bound", measured <= 1.0 + tolerance, measured, 1.0,
                   tolerance, f"c={c:.12g}")


def check_algebraic_bound(series: Sequence[TimeSeriesRecord], constants: BoundConstants,
                          which: BoundKind = BoundKind.ALGEBRAIC_1D,
                          tolerance: float = 0.05) -> Verdict:
    """
    Pass iff linf(t) <= linf(0) / (1 + c t)^p (1 + tolerance), p = 1 in 1-D and 2 in 2-D.

    Raises:
        PreconditionError: If the initial data change sign
    """
    _require_series(series, 'check_algebraic_bound')
    if which not in (BoundKind.ALGEBRAIC_1D, BoundKind.ALGEBRAIC_2D):
        raise PreconditionError(f"{which.value} is not an algebraic bound")
    first = series[0]
    if first.fmin < 0 < first.fmax:
        raise PreconditionError("algebraic decay bound needs sign-definite initial data")
    c = constants.for_kind(which)
    power = 1 if which is BoundKind.ALGEBRAIC_1D else 2
    measured = _envelope_ratio(series, lambda t: (1.0 + c * t) ** -power)
    notes = f"c={c:.12g} power={power}"
    if which is BoundKind.ALGEBRAIC_1D:
        integrated = constants.algebraic_1d * first.linf
        notes += f" integrated_c={integrated:.12g} integrated_ratio=" \
                 f"{_envelope_ratio(series, lambda t: 1.0 / (1.0 + integrated * t)):.6g}"
    else:
        notes += f" differential_c={constants.algebraic_2d:.12g}"
    return Verdict(f"{which.value}_bound", measured <= 1.0 + tolerance, measured, 1.0,
                   tolerance, notes)


def check_l1_conservation(series: Sequence[TimeSeriesRecord], tolerance: float = 1e-5) -> Verdict:
    _require_series(series, 'check_l1_conservation')
    l1 = np.array([r.l1 for r in series])
    measured = float(np.max(np.abs(l1 - l1[0])))
    return Verdict('l1_conservation', measured <= tolerance, measured, 0.0, tolerance,
                   f"l1_0={l1[0]:.12g}")


def check_slope_bound(series: Sequence[TimeSeriesRecord], tolerance: float = 1e-6) -> Verdict:
    """
    Pass iff max_slope stays below 1 and is nonincreasing within tolerance.

    Raises:
        PreconditionError: If the initial slope is not below 1 - 1e-3
    """
    _require_series(series, 'check_slope_bound')
    slopes = np.array([r.max_slope for r in series])
    if slopes[0] > 1.0 - SLOPE_MARGIN:
        raise PreconditionError(
            f"slope bound needs initial max slope <= {1.0 - SLOPE_MARGIN}, got {slopes[0]:.6g}"
        )
    measured = float(np.max(slopes))
    uptick = _max_increase(slopes)
    crossing = np.flatnonzero(slopes >= 1.0)
    notes = f"max_uptick={uptick:.3e}"
    if crossing.size:
        notes += f" first_crossing_t={series[int(crossing[0])].t:.6g}"
    passed = measured < 1.0 and uptick <= tolerance
    return Verdict('slope_bound', passed, measured, 1.0, tolerance, notes)


def _fit(times: np.ndarray, values: np.ndarray, model: DecayModel) -> DecayFit:
    if times.size < MIN_FIT_SAMPLES:
        raise DiagnosticsError(f"fit needs at least {MIN_FIT_SAMPLES} samples, got {times.size}")
    if not np.all(values > 0) or not np.all(np.isfinite(values)):
        raise DiagnosticsError("fit needs positive finite values")
    if np.ptp(times) == 0:
        raise DiagnosticsError("fit needs distinct times")
    if model is DecayModel.EXPONENTIAL:
        result = linregress(times, np.log(values))
        rate = -result.slope
    else:
        transformed = values ** (-1.0 if model is DecayModel.ALGEBRAIC_P1 else -0.5)
        result = linregress(times, transformed)
        rate = result.slope / result.intercept
    quality = float(result.rvalue ** 2)
    if not math.isfinite(quality):
        raise DiagnosticsError("degenerate series: constant values")
    return DecayFit(float(rate), quality, model)


def fit_decay(series: Union[Sequence[TimeSeriesRecord], Tuple[Sequence[float], Sequence[float]]],
              model: DecayModel = DecayModel.EXPONENTIAL) -> DecayFit:
    """
    Fit the decay of linf against a model.

    Exponential: linf = A exp(-r t), a least-squares line through log linf.
    AlgebraicP1 / AlgebraicP2: linf = A / (1 + c t)^p, a least-squares line
    through linf^(-1/p) (not log linf); c is slope / intercept.

    Args:
        series: Records, or a (times, values) pair
        model: Decay model

    Returns:
        DecayFit: rate (or constant c) and the coefficient of determination
    """
    if isinstance(series, tuple):
        times, values = (np.asarray(v, dtype=float) for v in series)
    else:
        times = np.array([r.t for r in series])
        values = np.array([r.linf for r in series])
    return _fit(times, values, model)


def mode_amplitude(state: ScalarField, k) -> float:
    """Amplitude 2|fhat(k)| of a single Fourier mode (integer wavenumbers on a 2*pi period)."""
    spectrum = transform(state)
    if isinstance(state, ScalarField2D):
        return 2.0 * abs(spectrum.mode(*k))
    return 2.0 * abs(spectrum.mode(k))


def check_growth_rate(times: Sequence[float], amplitudes: Sequence[float], expected_rate: float,
                      rel_tol: float = 0.05, amplitude_cap: float = 1e-2) -> Verdict:
    """
    Fit an exponential growth rate on the samples whose amplitude stays below the cap.
    """
    times = np.asarray(times, dtype=float)
    amplitudes = np.asarray(amplitudes, dtype=float)
    capped = np.flatnonzero(amplitudes >= amplitude_cap)
    stop = int(capped[0]) if capped.size else amplitudes.size
    fit = _fit(times[:stop], amplitudes[:stop], DecayModel.EXPONENTIAL)
    rate = -fit.rate
    measured_error = abs(rate - expected_rate) / abs(expected_rate)
    notes = f"fitted_rate={rate:.9g} samples={stop} quality={fit.quality:.9f}"
    return Verdict('growth_rate', measured_error <= rel_tol, rate, expected_rate,
                   rel_tol * abs(expected_rate), notes)


def check_extremum_rate(trajectory, params, quadrature_1d: Optional[Quadrature1DConfig] = None,
                        quadrature_2d: Optional[Quadrature2DConfig] = None,
                        tolerance: Optional[float] = None) -> Verdict:
    """
    Compare the forward difference of M(t) with the extremum term at each stored state.

    The default tolerance is dt * max|value| + 1e-6, the first-order
    truncation of the difference quotient plus a quadrature budget.
    """
    states = trajectory.states
    times = trajectory.times
    if len(states) != len(times) or len(states) < 2:
        raise PreconditionError("check_extremum_rate needs a trajectory with stored states")
    differences, values = [], []
    for k in range(len(states) - 1):
        dt = times[k + 1] - times[k]
        differences.append((trajectory.records[k + 1].fmax - trajectory.records[k].fmax) / dt)
        if isinstance(states[k], ScalarField2D):
            values.append(rhs_2d_at_extremum(states[k], params, quadrature_2d).value)
        else:
            values.append(rhs_at_extremum(states[k], params, quadrature_1d).value)
    differences, values = np.array(differences), np.array(values)
    if tolerance is None:
        tolerance = float(np.max(np.diff(times))) * float(np.max(np.abs(values))) + 1e-6
    measured = float(np.max(np.abs(differences - values)))
    return Verdict('extremum_rate', measured <= tolerance, measured, 0.0, tolerance,
                   f"steps={len(values)}")


def check_threshold(name: str, measured: float, bound: float, tolerance: float = 0.0,
                    sense: str = 'le', notes: str = '') -> Verdict:
    """Pass iff measured <= bound + tolerance ('le') or measured >= bound - tolerance ('ge')."""
    if sense == 'le':
        passed = measured <= bound + tolerance
    elif sense == 'ge':
        passed = measured >= bound - tolerance
    else:
        raise PreconditionError(f"sense must be 'le' or 'ge', got {sense!r}")
    return Verdict(name, bool(passed and math.isfinite(measured)), float(measured),
                   float(bound), float(tolerance), notes)


def summarize(verdicts: List[Verdict]) -> bool:
    """True iff every verdict passed."""
    return all(v.passed for v in verdicts)
