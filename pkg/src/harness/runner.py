"""
Scenario execution.

run_scenario integrates a configured run, evaluates the verdicts attached to
its scenario and writes three files into <output_dir>/<scenario>/:
series.csv (one row per sampled step), report.txt (one line per verdict) and
config.cfg (the fully resolved configuration).
"""

import os
import math
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..config.config_manager import format_flat
from ..config.run_config import RunConfig
from ..core.diagnostics import (
    CSV_COLUMNS, BoundKind, DecayModel, TimeSeriesRecord, Verdict, bound_constants,
    check_algebraic_bound, check_exponential_bound, check_extremum_rate, check_growth_rate,
    check_l1_conservation, check_max_principle, check_slope_bound, check_threshold, fit_decay,
    mode_amplitude
)
from ..core.fields import derivative
from ..core.muskat1d import n2_at
from ..core.muskat2d import (
    SingularRule2D, format_samples, parse_points, reduce_consistency, rhs_2d,
    velocity_at_extremum, velocity_field
)
from ..core.timestepping import (
    Integrator, RhsKind, Termination, Trajectory, measure_order
)
from ..utils.errors import OutputError, PreconditionError
from ..utils.parallel import set_thread_count
from .scenarios import get_scenario

logger = logging.getLogger(__name__)

# Growth fits stop once the interface steepens past this slope
GROWTH_SLOPE_CAP = 0.05
GROWTH_AMPLITUDE_CAP = 1e-2
N2_TOLERANCE = 1e-10
EXPECTED_ORDER = 3.8


@dataclass
class ScenarioResult:
    scenario: str
    verdicts: List[Verdict]
    trajectory: Optional[Trajectory] = None
    files: Dict[str, str] = field(default_factory=dict)
    lines: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    @property
    def exit_status(self) -> int:
        return 0 if self.passed else 1


def records_frame(records: Sequence[TimeSeriesRecord], stride: int = 1) -> pd.DataFrame:
    """Sampled records as a DataFrame with the CSV columns."""
    if stride < 1:
        raise PreconditionError(f"stride must be positive, got {stride}")
    rows = [r.to_dict() for r in records[::stride]]
    return pd.DataFrame(rows, columns=list(CSV_COLUMNS))


def emit_csv(trajectory: Trajectory, path: str, stride: int = 1) -> str:
    """
    Write every stride-th record of a trajectory as CSV.

    Raises:
        OutputError: If the file cannot be written
    """
    frame = records_frame(trajectory.records, stride)
    try:
        frame.to_csv(path, index=False, float_format='%.17g', lineterminator='\n')
    except OSError as e:
        raise OutputError(f"{path}: {e}") from e
    logger.debug(f"Wrote {len(frame)} rows to {path}")
    return path


def write_report(verdicts: Sequence[Verdict], path: str) -> str:
    """Write one report line per verdict."""
    try:
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            for verdict in verdicts:
                f.write(verdict.report_line() + '\n')
    except OSError as e:
        raise OutputError(f"{path}: {e}") from e
    return path


def _write_text(path: str, text: str) -> str:
    try:
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
    except OSError as e:
        raise OutputError(f"{path}: {e}") from e
    return path


def scenario_dir(config: RunConfig) -> str:
    path = os.path.join(config.output_dir, config.scenario)
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise OutputError(f"{path}: {e}") from e
    return path


@dataclass
class _RunContext:
    config: RunConfig
    trajectory: Trajectory
    n2_samples: List[float] = field(default_factory=list)


def _slack(ctx: _RunContext) -> float:
    return float(ctx.config.checks['bound_slack'])


def _constants(ctx: _RunContext):
    first = ctx.trajectory.records[0]
    return bound_constants(first.linf, first.l1, ctx.config.params.rho_bar)


def _max_principle(ctx):
    return check_max_principle(ctx.trajectory.records, ctx.config.checks['step_tolerance'])


def _exponential_bound(ctx):
    kind = BoundKind.EXPONENTIAL_2D if ctx.config.dimension == 2 else BoundKind.EXPONENTIAL_1D
    return check_exponential_bound(ctx.trajectory.records, _constants(ctx), kind, _slack(ctx))


def _algebraic_bound(ctx):
    kind = BoundKind.ALGEBRAIC_2D if ctx.config.dimension == 2 else BoundKind.ALGEBRAIC_1D
    return check_algebraic_bound(ctx.trajectory.records, _constants(ctx), kind, _slack(ctx))


def _l1_conservation(ctx):
    return check_l1_conservation(ctx.trajectory.records)


def _decay_rate(ctx):
    fit = fit_decay(ctx.trajectory.records, DecayModel.EXPONENTIAL)
    expected = ctx.config.checks['expected_rate']
    if expected is None:
        expected = 0.9 * 0.5 * abs(ctx.config.params.rho_bar)
    return check_threshold('decay_rate', fit.rate, expected, sense='ge',
                           notes=f"quality={fit.quality:.9f}")


def _extremum_rate(ctx):
    return check_extremum_rate(ctx.trajectory, ctx.config.params, ctx.config.quadrature_1d,
                               ctx.config.quadrature_2d)


def _slope_bound(ctx):
    return check_slope_bound(ctx.trajectory.records, ctx.config.checks['step_tolerance'])


def _n2_sign(ctx):
    expected = len(ctx.trajectory.records)
    samples = ctx.n2_samples
    if len(samples) != expected:
        logger.warning(f"n2 monitor recorded {len(samples)} of {expected} states")
        worst = math.inf
    else:
        worst = max(samples)
    return check_threshold('n2_sign', worst, 0.0, N2_TOLERANCE,
                           notes=f"samples={len(samples)}/{expected}")


def _leading_wavenumber(config: RunConfig):
    modes = config.initial.get('parsed_modes') or []
    if not modes:
        raise PreconditionError("growth check needs a mode-list initial condition")
    wavenumber = modes[0][0]
    return tuple(int(round(k)) for k in wavenumber)


def _growth_rate(ctx):
    config = ctx.config
    k = _leading_wavenumber(config)
    key = k if config.dimension == 2 else k[0]
    expected = config.checks['expected_rate']
    if expected is None:
        expected = 0.5 * abs(config.params.rho_bar) * math.hypot(*k)
    records = ctx.trajectory.records
    steep = [i for i, r in enumerate(records) if r.max_slope > GROWTH_SLOPE_CAP]
    stop = steep[0] if steep else len(records)
    times = ctx.trajectory.times[:stop]
    amplitudes = [mode_amplitude(state, key) for state in ctx.trajectory.states[:stop]]
    return check_growth_rate(times, amplitudes, expected, _slack(ctx), GROWTH_AMPLITUDE_CAP)


def _blowup_guard(ctx):
    trajectory = ctx.trajectory
    hit = trajectory.termination is Termination.BLOWUP_GUARD
    return check_threshold('blowup_guard', 1.0 if hit else 0.0, 1.0, sense='ge',
                           notes=f"termination={trajectory.termination.value} "
                                 f"t={trajectory.times[-1]:.6g}")


CHECKS: Dict[str, Callable[[_RunContext], Verdict]] = {
    'max_principle': _max_principle,
    'exponential_bound': _exponential_bound,
    'algebraic_bound': _algebraic_bound,
    'l1_conservation': _l1_conservation,
    'decay_rate': _decay_rate,
    'extremum_rate': _extremum_rate,
    'slope_bound': _slope_bound,
    'n2_sign': _n2_sign,
    'growth_rate': _growth_rate,
    'blowup_guard': _blowup_guard,
}


def _reduction_verdict(config: RunConfig) -> Verdict:
    if config.dimension != 1:
        raise PreconditionError("reduction_check takes a 1-D profile (dimension = 1)")
    cfg2d = replace(config.quadrature_2d, singular_rule=SingularRule2D.POLAR_PATCH)
    result = reduce_consistency(config.initial_field(), config.params, cfg2d,
                                config.quadrature_1d)
    return check_threshold(
        'reduction_gap', result['l_inf_gap'], _slack_value(config), sense='le',
        notes=f"rhs_1d_linf={result['rhs_1d_linf']:.6g} image_layers={cfg2d.image_layers} "
              f"far_field={cfg2d.far_field}"
    )


def _slack_value(config: RunConfig) -> float:
    return float(config.checks['bound_slack'])


def _velocity_verdict(config: RunConfig) -> Verdict:
    f = config.initial_field()
    probe = velocity_at_extremum(f, config.params, config.quadrature_2d)
    reference = float(rhs_2d(f, config.params, config.quadrature_2d).samples[probe.index])
    scale = abs(reference) if reference != 0 else 1.0
    relative = abs(probe.limit - reference) / scale
    return check_threshold('velocity_limit', relative, _slack_value(config), sense='le',
                           notes=f"limit={probe.limit:.9g} rhs={reference:.9g}")


def run_scenario(config: RunConfig, points: Optional[Sequence] = None) -> ScenarioResult:
    """
    Execute one configured scenario.

    Args:
        config: Resolved run configuration
        points: Velocity query points (velocity_probe only)

    Returns:
        ScenarioResult: Verdicts, trajectory and the files written

    Raises:
        MuskatLabError: On integration, precondition or output failures
    """
    spec = get_scenario(config.scenario)
    set_thread_count(config.threads)
    out = scenario_dir(config)
    logger.info(f"Running scenario {spec.name}: {spec.description}")
    result = ScenarioResult(spec.name, [])

    if spec.mode == 'reduction':
        result.verdicts.append(_reduction_verdict(config))
    elif spec.mode == 'probe':
        if config.dimension != 2:
            raise PreconditionError("velocity_probe needs dimension = 2")
        if points:
            result.lines = _probe_lines(config, points)
            result.files['velocity'] = _write_text(os.path.join(out, 'velocity.txt'),
                                                   ''.join(line + '\n' for line in result.lines))
        result.verdicts.append(_velocity_verdict(config))
    else:
        integrator = Integrator(config.params, config.control, RhsKind.NONLINEAR,
                                config.quadrature_1d, config.quadrature_2d)
        context_n2: List[float] = []
        if 'n2_sign' in spec.checks:
            def monitor_n2(t, state, record):
                index = int(np.argmax(derivative(state).samples))
                context_n2.append(n2_at(state, config.params, index))
            integrator.add_callback('on_step', monitor_n2)
        trajectory = integrator.run(config.initial_field())
        result.trajectory = trajectory
        ctx = _RunContext(config, trajectory, context_n2)
        result.verdicts.extend(CHECKS[name](ctx) for name in spec.checks)
        result.files['series'] = emit_csv(trajectory, os.path.join(out, 'series.csv'),
                                          config.stride)

    result.files['report'] = write_report(result.verdicts, os.path.join(out, 'report.txt'))
    result.files['config'] = _write_text(os.path.join(out, 'config.cfg'),
                                         format_flat(config.settings))
    for verdict in result.verdicts:
        logger.info(verdict.report_line())
    return result


def _probe_lines(config: RunConfig, points: Sequence) -> List[str]:
    samples = velocity_field(config.initial_field(), config.params, points,
                             config.quadrature_2d)
    return format_samples(samples)


def probe(config: RunConfig, points_text: str) -> List[str]:
    """
    Evaluate the velocity of the configured initial interface at query points.

    Returns:
        list: One "x1 x2 x3 v1 v2 v3" line per point, also written to velocity.txt
    """
    if config.dimension != 2:
        raise PreconditionError("probe needs a 2-D configuration")
    set_thread_count(config.threads)
    lines = _probe_lines(config, parse_points(points_text))
    _write_text(os.path.join(scenario_dir(config), 'velocity.txt'),
                ''.join(line + '\n' for line in lines))
    return lines


def convergence(config: RunConfig) -> List[Verdict]:
    """
    Temporal self-convergence study of the configured run.

    Runs with dt, dt/2 and dt/4 to control.t_end, writes convergence.csv and
    returns the measured-order verdict.
    """
    set_thread_count(config.threads)
    f0 = config.initial_field()
    dt = config.control.nominal_dt(f0.grid, config.params.rho_bar)
    measured = measure_order(f0, config.params, RhsKind.NONLINEAR, config.control.t_end, dt,
                             config.control.scheme, config.quadrature_1d, config.quadrature_2d)
    frame = pd.DataFrame({
        'dt': list(measured['dt'][:2]),
        'difference': list(measured['differences']),
    })
    path = os.path.join(scenario_dir(config), 'convergence.csv')
    try:
        frame.to_csv(path, index=False, float_format='%.17g', lineterminator='\n')
    except OSError as e:
        raise OutputError(f"{path}: {e}") from e
    verdict = check_threshold('temporal_order', measured['order'], EXPECTED_ORDER, sense='ge',
                              notes=f"scheme={config.control.scheme.value}")
    write_report([verdict], os.path.join(scenario_dir(config), 'convergence_report.txt'))
    return [verdict]
