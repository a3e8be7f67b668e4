"""
One-command acceptance suite.

Every row checks one property of the solver at desk scale and produces one
or more verdicts; a row passes iff all its verdicts pass. Rows run one after
another, each writing under its own directory of the suite's output root.
"""

import os
import math
import time
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..config.config_defaults import DEFAULT_OUTPUT_DIR, OUTPUT_DIR_ENV
from ..config.config_manager import ConfigManager
from ..config.run_config import RunConfig
from ..core.diagnostics import Verdict, check_threshold
from ..core.fields import (
    PhysParams, field_from_function, grid_mean, lambda_op, linear_evolve, make_field, make_grid,
    make_grid_2d, riesz, derivative
)
from ..core.muskat1d import (
    image_sum_kernel, i2_residual, periodized_kernel, rhs_at_extremum, rhs_periodic
)
from ..core.muskat2d import (
    Quadrature2DConfig, SingularRule2D, rhs_2d, rhs_2d_at_extremum
)
from ..core.timestepping import RhsKind, Scheme, StepControl, integrate, measure_order
from ..utils.errors import MuskatLabError, OutputError
from ..utils.parallel import set_thread_count
from .runner import run_scenario

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ('row', 'name', 'status', 'verdicts', 'worst', 'seconds')


@dataclass
class _SuiteContext:
    root: str
    overrides: Sequence[str] = ()
    threads: Optional[int] = None

    def scenario_config(self, scenario: str, row: int, extra: Iterable[str] = ()) -> RunConfig:
        overrides = list(extra) + list(self.overrides)
        if self.threads is not None:
            overrides.append(f"runtime.threads={self.threads}")
        manager = ConfigManager(text=f"scenario = {scenario}\n", overrides=overrides)
        return manager.to_run_config(output_dir=os.path.join(self.root, f"row_{row:02d}"))

    def run(self, scenario: str, row: int, extra: Iterable[str] = ()) -> List[Verdict]:
        return run_scenario(self.scenario_config(scenario, row, extra)).verdicts


@dataclass(frozen=True)
class AcceptanceRow:
    number: int
    name: str
    evaluate: Callable[[_SuiteContext], List[Verdict]]
    slow: bool = False


@dataclass
class AcceptanceResult:
    summary: pd.DataFrame
    verdicts: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool((self.summary['status'] == 'PASS').all())

    @property
    def exit_status(self) -> int:
        return 0 if self.passed else 1


STABLE = PhysParams.from_jump(1.0)


def _kernel_oracle(ctx):
    alphas = np.linspace(-math.pi, math.pi, 66)[1:-1]
    heights = np.linspace(-3.0, 3.0, 64)
    a, d = np.meshgrid(alphas, heights, indexing='ij')
    gap = float(np.max(np.abs(periodized_kernel(a, d) - image_sum_kernel(a, d))))
    return [check_threshold('kernel_oracle', gap, 1e-8)]


def _linear_residual_1d(grid, k, eps):
    f = field_from_function(grid, lambda x: eps * np.cos(k * x))
    expected = -0.5 * k * eps * np.cos(k * grid.nodes())
    got = rhs_periodic(f, STABLE).samples
    return float(np.max(np.abs(got - expected)) / np.max(np.abs(expected)))


def _linearization_1d(ctx):
    grid = make_grid(256)
    worst = max(_linear_residual_1d(grid, k, 1e-5) for k in range(1, 5))
    exponent = min(
        math.log2(_linear_residual_1d(grid, k, 1e-2) / _linear_residual_1d(grid, k, 5e-3))
        for k in range(1, 5)
    )
    return [
        check_threshold('linearization_1d', worst, 1e-4),
        check_threshold('quadratic_residual', exponent, 1.9, sense='ge'),
    ]


def _linear_residual_2d(n, wavenumber, cfg, eps=1e-5):
    grid = make_grid_2d(n)
    k1, k2 = wavenumber
    x1, x2 = grid.nodes()
    phase = np.cos(k1 * x1 + k2 * x2)
    f = make_field(grid, eps * phase)
    expected = -0.5 * math.hypot(k1, k2) * eps * phase
    got = rhs_2d(f, STABLE, cfg).samples
    return float(np.max(np.abs(got - expected)) / np.max(np.abs(expected)))


def _linearization_2d(ctx):
    cfg = Quadrature2DConfig(singular_rule=SingularRule2D.POLAR_PATCH)
    worst = max(_linear_residual_2d(64, k, cfg) for k in ((1, 0), (1, 1), (2, 1)))
    coarse = _linear_residual_2d(32, (1, 0), cfg)
    fine = _linear_residual_2d(64, (1, 0), cfg)
    verdicts = [
        check_threshold('linearization_2d', worst, 1e-2),
        check_threshold('refinement_gain', fine, coarse, sense='le',
                        notes=f"coarse={coarse:.3e} fine={fine:.3e}"),
    ]
    verdicts.extend(ctx.run('reduction_check', 3))
    return verdicts


def _max_principle_1d(ctx):
    return ctx.run('stable_decay_1d', 4, ['grid.n=512', 'initial.modes=1:0.3:0;3:0.1:0'])


def _max_principle_2d(ctx):
    return ctx.run('stable_decay_2d', 5)


def _exponential_1d(ctx):
    return ctx.run('periodic_meanzero_decay_1d', 6)


def _exponential_2d(ctx):
    return ctx.run('periodic_meanzero_decay_2d', 7)


def _algebraic_1d(ctx):
    return ctx.run('line_nonneg_decay_1d', 8)


def _algebraic_2d(ctx):
    return ctx.run('line_nonneg_decay_2d', 9, ['grid.allow_large=true'])


def _slope_bound(ctx):
    return ctx.run('slope_bound_1d', 10)


def _unstable_growth(ctx):
    return ctx.run('unstable_growth_1d', 11)


def _identities(ctx):
    verdicts = []

    fine = make_grid(1024)
    profiles = (
        (lambda x: 0.3 * np.cos(x), (0, fine.n // 2)),
        (lambda x: 0.3 * np.cos(x) + 0.1 * np.cos(2 * x), (0,)),
        (lambda x: 0.4 * np.cos(x) ** 3, (0, fine.n // 2)),
    )
    residual = max(abs(i2_residual(field_from_function(fine, fn), index, STABLE))
                   for fn, nodes in profiles for index in nodes)
    verdicts.append(check_threshold('i2_residual', residual, 1e-8,
                                    notes=f"profiles={len(profiles)}"))

    grid = make_grid(512)
    f = field_from_function(grid, lambda x: 0.3 * np.cos(x) + 0.1 * np.cos(3 * x))
    full = rhs_periodic(f, STABLE).samples
    top = rhs_at_extremum(f, STABLE, extremum='max')
    bottom = rhs_at_extremum(f, STABLE, extremum='min')
    verdicts.append(check_threshold('extremum_sign', max(top.value, -bottom.value), 0.0, 1e-12,
                                    notes=f"max={top.value:.6g} min={bottom.value:.6g}"))
    agreement = max(abs(top.value - full[top.index]), abs(bottom.value - full[bottom.index]))
    verdicts.append(check_threshold('extremum_agreement', agreement, 1e-6))

    cfg2d = Quadrature2DConfig(singular_rule=SingularRule2D.POLAR_PATCH)
    grid2d = make_grid_2d(64)
    x1, x2 = grid2d.nodes()
    surface = make_field(grid2d, 0.2 * np.cos(x1) * np.cos(x2))
    full2d = rhs_2d(surface, STABLE, cfg2d)
    peak = rhs_2d_at_extremum(surface, STABLE, cfg2d)
    reference = float(full2d.samples[peak.index])
    verdicts.append(check_threshold('extremum_agreement_2d',
                                    abs(peak.value - reference) / abs(reference), 1e-2))

    skewed = field_from_function(grid, lambda x: 0.3 * np.cos(x) + 0.2 * np.sin(2 * x))
    verdicts.append(check_threshold('mean_conservation_1d',
                                    abs(grid_mean(rhs_periodic(skewed, STABLE))), 1e-10))
    verdicts.append(check_threshold('mean_conservation_2d', abs(grid_mean(full2d)), 1e-6))

    rng = np.random.default_rng(20240611)
    grid32 = make_grid_2d(32)
    k1, k2 = grid32.wavenumbers()
    band = (np.abs(k1) <= 8) & (np.abs(k2) <= 8)
    random = make_field(grid32, np.fft.ifft2(
        np.fft.fft2(rng.standard_normal(grid32.shape)) * band).real)
    composed = (riesz(derivative(random, 0), 0).samples
                + riesz(derivative(random, 1), 1).samples)
    gap = float(np.max(np.abs(composed - lambda_op(random).samples)))
    verdicts.append(check_threshold('riesz_identity', gap, 1e-10))
    return verdicts


def _hygiene(ctx):
    verdicts = []
    grid = make_grid(64)
    f0 = field_from_function(grid, lambda x: 0.3 * np.cos(x))
    order = measure_order(f0, STABLE, RhsKind.NONLINEAR, 0.1, 0.025)['order']
    verdicts.append(check_threshold('temporal_order', order, 3.8, sense='ge'))

    rough = field_from_function(grid, lambda x: 0.2 * np.cos(x) + 0.05 * np.sin(7 * x)
                                + 0.01 * np.cos(20 * x))
    control = StepControl(t_end=1.0, dt=0.05, scheme=Scheme.INTEGRATING_FACTOR)
    final = integrate(rough, STABLE, control, RhsKind.LINEAR, store_states=False).final_state
    exact = linear_evolve(rough, 1.0, STABLE)
    verdicts.append(check_threshold('integrating_factor_exact',
                                    float(np.max(np.abs(final.samples - exact.samples))), 1e-12))

    contents = []
    for repeat in range(2):
        config = ctx.scenario_config('stable_decay_1d', 13,
                                     ['grid.n=64', 'control.t_end=1.0'])
        config.output_dir = os.path.join(ctx.root, 'row_13', f'run_{repeat}')
        path = run_scenario(config).files['series']
        try:
            with open(path, 'rb') as f:
                contents.append(f.read())
        except OSError as e:
            raise OutputError(f"{path}: {e}") from e
    verdicts.append(check_threshold('determinism', 0.0 if contents[0] == contents[1] else 1.0,
                                    0.0, notes=f"bytes={len(contents[0])}"))
    return verdicts


ROWS = (
    AcceptanceRow(1, 'kernel_oracle', _kernel_oracle),
    AcceptanceRow(2, 'linearization_1d', _linearization_1d),
    AcceptanceRow(3, 'linearization_2d', _linearization_2d),
    AcceptanceRow(4, 'max_principle_1d', _max_principle_1d),
    AcceptanceRow(5, 'max_principle_2d', _max_principle_2d),
    AcceptanceRow(6, 'exponential_decay_1d', _exponential_1d),
    AcceptanceRow(7, 'exponential_decay_2d', _exponential_2d),
    AcceptanceRow(8, 'algebraic_decay_1d', _algebraic_1d),
    AcceptanceRow(9, 'algebraic_decay_2d', _algebraic_2d, slow=True),
    AcceptanceRow(10, 'slope_bound', _slope_bound),
    AcceptanceRow(11, 'unstable_growth', _unstable_growth),
    AcceptanceRow(12, 'identities', _identities),
    AcceptanceRow(13, 'hygiene', _hygiene),
)


def select_rows(slow: bool = False, only: Optional[Iterable[int]] = None) -> List[AcceptanceRow]:
    """Rows to run: all non-slow rows, slow ones on request, or an explicit subset."""
    if only:
        wanted = {int(number) for number in only}
        unknown = wanted - {row.number for row in ROWS}
        if unknown:
            raise MuskatLabError(f"unknown acceptance row(s): {sorted(unknown)}")
        return [row for row in ROWS if row.number in wanted]
    return [row for row in ROWS if slow or not row.slow]


def _evaluate(row: AcceptanceRow, ctx: _SuiteContext):
    started = time.perf_counter()
    try:
        verdicts = row.evaluate(ctx)
    except MuskatLabError as e:
        logger.error(f"Row {row.number} ({row.name}) raised {type(e).__name__}: {e}")
        verdicts = [Verdict(row.name, False, math.nan, math.nan, 0.0, str(e))]
    elapsed = time.perf_counter() - started
    failing = [v for v in verdicts if not v.passed]
    worst = failing[0] if failing else verdicts[-1]
    entry = {
        'row': row.number,
        'name': row.name,
        'status': 'FAIL' if failing else 'PASS',
        'verdicts': len(verdicts),
        'worst': worst.check_name,
        'seconds': round(elapsed, 2),
    }
    return entry, verdicts


def run_acceptance(output_dir: Optional[str] = None, overrides: Sequence[str] = (),
                   slow: bool = False, only: Optional[Iterable[int]] = None,
                   threads: Optional[int] = None) -> AcceptanceResult:
    """
    Run the acceptance rows and write summary.csv and report.txt under <output_dir>/acceptance.

    Args:
        output_dir: Output root (falls back to the environment, then the default)
        overrides: "key=value" pairs applied to every scenario-based row
        slow: Include rows marked slow
        only: Row numbers to run instead of the default selection
        threads: Worker count for the quadrature kernels

    Returns:
        AcceptanceResult: One summary row per acceptance row
    """
    base = output_dir or os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR
    root = os.path.join(base, 'acceptance')
    try:
        os.makedirs(root, exist_ok=True)
    except OSError as e:
        raise OutputError(f"{root}: {e}") from e
    if threads is not None:
        set_thread_count(threads)
    ctx = _SuiteContext(root, tuple(overrides), threads)

    entries, verdicts = [], {}
    for row in select_rows(slow, only):
        logger.info(f"Acceptance row {row.number}: {row.name}")
        entry, row_verdicts = _evaluate(row, ctx)
        entries.append(entry)
        verdicts[row.number] = row_verdicts
        logger.info(f"Row {row.number} {entry['status']} in {entry['seconds']:.2f}s")

    summary = pd.DataFrame(entries, columns=list(SUMMARY_COLUMNS))
    try:
        summary.to_csv(os.path.join(root, 'summary.csv'), index=False, lineterminator='\n')
        with open(os.path.join(root, 'report.txt'), 'w', encoding='utf-8', newline='\n') as f:
            for number in sorted(verdicts):
                for verdict in verdicts[number]:
                    f.write(f"ROW {number} {verdict.report_line()}\n")
    except OSError as e:
        raise OutputError(f"{root}: {e}") from e
    return AcceptanceResult(summary, verdicts)


def format_summary(result: AcceptanceResult) -> str:
    return result.summary.to_string(index=False)
