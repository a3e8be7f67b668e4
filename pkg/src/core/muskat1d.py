"""
Right-hand side of the 1-D interface equation.

For a graph interface y = f(x) the contour equation reads

    f_t(x) = (rho_bar / 2 pi) PV int (f'(x) - f'(x - a)) a / (a^2 + (f(x) - f(x - a))^2) da

with the principal value taken at infinity. On a periodic grid the kernel is
replaced by its image sum in closed form and integrated over one period with
the trapezoid rule; on a truncated line the raw kernel is integrated over a
symmetric window, completed beyond it from the periodic extension of the box
unless far_field is off. This module also evaluates the extremum identities
and the slope-evolution decomposition used to monitor the maximum principle
and the slope bound.
"""

import math
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.special import polygamma, zeta

from .fields import (
    TWO_PI, ScalarField1D, apply_multiplier, check_decay, derivative, zeros_like
)
from ..utils.errors import ConfigurationError, DomainViolationError, PreconditionError
from ..utils.parallel import parallel_map

logger = logging.getLogger(__name__)

# Upper bound on kernel evaluations held in memory per block of output rows
BLOCK_ELEMENTS = 1 << 18
# Periodic images summed explicitly in the slope weight integral
IMAGE_TERMS = 12
# Half width, in periods, of the window used for the I2 residual
RESIDUAL_PERIODS = 8
EXTREMUM_SLOPE_LIMIT = 1e-6
IMAGE_SUM_TERMS = 10_000


class NodeOffset(Enum):
    COLLOCATED = 'collocated'
    HALF_SHIFTED = 'half_shifted'


class SingularRule1D(Enum):
    ANALYTIC_LIMIT = 'analytic_limit'
    SKIP_NODE = 'skip_node'


@dataclass(frozen=True)
class Quadrature1DConfig:
    """
    Quadrature settings for the 1-D kernels.

    Attributes:
        node_offset: Collocated offsets a = m*h, or HalfShifted a = (m + 1/2)*h
        singular_rule: Treatment of the a = 0 node under Collocated offsets
        line_truncation_radius: Window half width on TruncatedLine grids
            (None means length/2)
        far_field: Complete the TruncatedLine window beyond the radius with
            the image sums of the periodic box
    """

    node_offset: NodeOffset = NodeOffset.COLLOCATED
    singular_rule: SingularRule1D = SingularRule1D.ANALYTIC_LIMIT
    line_truncation_radius: Optional[float] = None
    far_field: bool = True

    def __post_init__(self):
        if not isinstance(self.node_offset, NodeOffset):
            raise ConfigurationError(f"unknown node offset {self.node_offset!r}")
        if not isinstance(self.singular_rule, SingularRule1D):
            raise ConfigurationError(f"unknown 1-D singular rule {self.singular_rule!r}")
        radius = self.line_truncation_radius
        if radius is not None and not (math.isfinite(radius) and radius > 0):
            raise ConfigurationError(f"line truncation radius must be positive, got {radius}")

    def truncation_radius(self, grid) -> float:
        half = 0.5 * grid.length
        if self.line_truncation_radius is None:
            return half
        if self.line_truncation_radius > half * (1.0 + 1e-12):
            raise ConfigurationError(
                f"line truncation radius {self.line_truncation_radius} exceeds "
                f"half the box length {half}"
            )
        return self.line_truncation_radius


@dataclass(frozen=True, eq=False)
class SlopeDecomposition:
    """
    Split of the slope evolution d/dt f' = n1 + n2.

    q_weight, when retained, holds Q(x_i, b_m) for the centred offsets
    b_m = m*h, m = -n/2+1 .. n/2 (row i, column m + n/2 - 1).
    """

    n1: ScalarField1D
    n2: ScalarField1D
    q_weight: Optional[np.ndarray] = None


@dataclass(frozen=True)
class ExtremumValue:
    index: int
    value: float
    tie: bool = False


class PeriodizedKernel:
    """
    Image sums of the 1-D kernels for a fixed period and set of offsets.

    odd(d):    sum_k (a + kL) / ((a + kL)^2 + d^2) = (s/2) sin(s a) / (cosh(s d) - cos(s a))
    height(d): sum_k d / ((a + kL)^2 + d^2)       = (s/2) sinh(s d) / (cosh(s d) - cos(s a))

    with s = 2 pi / L. Both are evaluated in a form scaled by exp(-|s d|) so
    that neither small arguments nor large heights lose precision.
    """

    def __init__(self, alphas, period: float = TWO_PI):
        self.scale = TWO_PI / period
        angles = self.scale * np.asarray(alphas, dtype=float)
        self.sin_full = np.sin(angles)
        self.sin_half_sq4 = 4.0 * np.sin(0.5 * angles) ** 2

    def _parts(self, d):
        x = self.scale * np.asarray(d, dtype=float)
        ax = np.abs(x)
        decay = np.exp(-ax)
        denominator = np.expm1(-ax) ** 2 + self.sin_half_sq4 * decay
        return x, ax, decay, denominator

    def odd(self, d) -> np.ndarray:
        _, _, decay, denominator = self._parts(d)
        return self.scale * self.sin_full * decay / denominator

    def height(self, d) -> np.ndarray:
        x, ax, _, denominator = self._parts(d)
        return 0.5 * self.scale * np.sign(x) * -np.expm1(-2.0 * ax) / denominator


def _as_output(value):
    return float(value) if np.ndim(value) == 0 else value


def periodized_kernel(alpha, d, period: float = TWO_PI):
    """
    Closed-form image sum of a / (a^2 + d^2) over the period.

    Args:
        alpha: Offset(s)
        d: Height difference(s), broadcast against alpha
        period: Image spacing

    Returns:
        float or np.ndarray: Kernel value(s)

    Raises:
        DomainViolationError: If alpha and d vanish together
    """
    alpha, d = np.broadcast_arrays(np.asarray(alpha, dtype=float), np.asarray(d, dtype=float))
    if np.any((alpha == 0) & (d == 0)):
        raise DomainViolationError("periodized kernel is singular at (0, 0)")
    return _as_output(PeriodizedKernel(alpha, period).odd(d))


def periodized_height_kernel(alpha, d, period: float = TWO_PI):
    """Closed-form image sum of d / (a^2 + d^2)."""
    alpha, d = np.broadcast_arrays(np.asarray(alpha, dtype=float), np.asarray(d, dtype=float))
    if np.any((alpha == 0) & (d == 0)):
        raise DomainViolationError("periodized height kernel is singular at (0, 0)")
    return _as_output(PeriodizedKernel(alpha, period).height(d))


def image_sum_kernel(alpha, d, terms: int = IMAGE_SUM_TERMS, period: float = TWO_PI):
    """
    Truncated image sum of a / (a^2 + d^2) over |k| <= terms.

    The discarded images contribute -2 a / L^2 * trigamma(terms + 1) to
    leading order; that tail is added back so the sum is accurate to
    O(terms^-3).
    """
    alpha, d = np.broadcast_arrays(np.asarray(alpha, dtype=float), np.asarray(d, dtype=float))
    flat_alpha = alpha.ravel()
    flat_d = d.ravel()
    images = np.arange(-terms, terms + 1) * period
    out = np.empty(flat_alpha.size)
    chunk = max(1, BLOCK_ELEMENTS // images.size)
    for start in range(0, flat_alpha.size, chunk):
        stop = start + chunk
        shifted = flat_alpha[start:stop, None] + images[None, :]
        height = flat_d[start:stop, None]
        out[start:stop] = np.sum(shifted / (shifted * shifted + height * height), axis=1)
    tail = -2.0 * flat_alpha / period ** 2 * float(polygamma(1, terms + 1))
    return _as_output((out + tail).reshape(alpha.shape))


@dataclass(frozen=True)
class _Stencil:
    shifts: np.ndarray
    alphas: np.ndarray
    weights: np.ndarray
    node_weight: float
    half_shifted: bool


def _wraps(grid, cfg: Quadrature1DConfig) -> bool:
    """Whether offsets run over the whole period of the (embedding) box."""
    return grid.is_periodic or cfg.far_field


def _stencil(grid, cfg: Quadrature1DConfig) -> _Stencil:
    n, h = grid.n, grid.spacing
    half_shifted = cfg.node_offset is NodeOffset.HALF_SHIFTED
    if _wraps(grid, cfg):
        shifts = np.arange(n) if half_shifted else np.arange(1, n)
        weights = np.full(shifts.size, h)
    else:
        reach = int(round(cfg.truncation_radius(grid) / h))
        if reach < 1:
            raise ConfigurationError("line truncation radius is below one grid spacing")
        if half_shifted:
            shifts = np.arange(-reach, reach)
            weights = np.full(shifts.size, h)
        else:
            shifts = np.concatenate([np.arange(-reach, 0), np.arange(1, reach + 1)])
            weights = np.full(shifts.size, h)
            weights[0] = weights[-1] = 0.5 * h
    alphas = (shifts + 0.5) * h if half_shifted else shifts * h
    analytic = cfg.singular_rule is SingularRule1D.ANALYTIC_LIMIT
    node_weight = h if (analytic and not half_shifted) else 0.0
    return _Stencil(shifts, alphas, weights, node_weight, half_shifted)


def _gather(values: np.ndarray, raw: np.ndarray, wrap: bool) -> np.ndarray:
    """values[raw], periodically or with zeros outside the box."""
    n = values.size
    if wrap:
        return values[raw % n]
    inside = (raw >= 0) & (raw < n)
    return np.where(inside, values[np.clip(raw, 0, n - 1)], 0.0)


def _half_shifted(f: ScalarField1D) -> ScalarField1D:
    """f(x - h/2) sampled at the nodes."""
    symbol = np.exp(-0.5j * f.grid.wavenumbers() * f.grid.spacing)
    symbol[f.grid.n // 2] = 0.0
    return apply_multiplier(f, symbol)


def _blocked_rows(rows: np.ndarray, width: int, evaluate) -> np.ndarray:
    if rows.size == 0:
        return np.zeros(0)
    per_block = max(1, BLOCK_ELEMENTS // max(1, width))
    blocks = [rows[start:start + per_block] for start in range(0, rows.size, per_block)]
    return np.concatenate(parallel_map(evaluate, blocks))


def _require_1d(f, periodic: Optional[bool] = None, name: str = 'operation'):
    if not isinstance(f, ScalarField1D):
        raise DomainViolationError(f"{name} needs a 1-D field")
    if periodic is True and not f.grid.is_periodic:
        raise DomainViolationError(f"{name} needs a PeriodicTorus grid")
    if periodic is False and f.grid.is_periodic:
        raise DomainViolationError(f"{name} needs a TruncatedLine grid")


def _contour_sums(f: ScalarField1D, cfg: Quadrature1DConfig, periodized: bool) -> np.ndarray:
    grid = f.grid
    n = grid.n
    stencil = _stencil(grid, cfg)
    u = f.samples
    up = derivative(f, enforce_decay=False).samples
    if stencil.half_shifted:
        source = _half_shifted(f)
        src_u = source.samples
        src_p = derivative(source, enforce_decay=False).samples
    else:
        src_u, src_p = u, up

    shifts = stencil.shifts
    alphas = stencil.alphas
    weights = stencil.weights
    kernel = PeriodizedKernel(alphas, grid.length) if periodized else None

    def evaluate(rows):
        raw = rows[:, None] - shifts[None, :]
        d = u[rows, None] - _gather(src_u, raw, periodized)
        dp = up[rows, None] - _gather(src_p, raw, periodized)
        if kernel is not None:
            values = kernel.odd(d)
        else:
            values = alphas / (alphas * alphas + d * d)
        return np.sum(weights * dp * values, axis=1)

    sums = _blocked_rows(np.arange(n), shifts.size, evaluate)
    if stencil.node_weight:
        fpp = derivative(f, order=2, enforce_decay=False).samples
        sums = sums + stencil.node_weight * fpp / (1.0 + up * up)
    return sums


def rhs_periodic(f: ScalarField1D, params, cfg: Optional[Quadrature1DConfig] = None
                 ) -> ScalarField1D:
    """
    Evaluate f_t on a periodic grid.

    Args:
        f: Interface height on a PeriodicTorus grid
        params: Densities
        cfg: Quadrature settings

    Returns:
        ScalarField1D: f_t at the nodes
    """
    cfg = cfg or Quadrature1DConfig()
    _require_1d(f, periodic=True, name='rhs_periodic')
    if params.rho_bar == 0:
        return zeros_like(f)
    return f.with_samples((params.rho_bar / TWO_PI) * _contour_sums(f, cfg, periodized=True))


def rhs_line(f: ScalarField1D, params, cfg: Optional[Quadrature1DConfig] = None,
             enforce_decay: bool = True) -> ScalarField1D:
    """
    Evaluate f_t on a truncated line.

    The raw kernel is integrated over the symmetric window [-R, R] with
    trapezoid end weights. With far_field set (the default) the field is
    extended periodically from the box and the window is completed with the
    image-summed kernel, the limit R -> infinity of the symmetric window.
    Without it only the window is used and samples beyond the box read as 0.

    Args:
        f: Interface height on a TruncatedLine grid
        params: Densities
        cfg: Quadrature settings
        enforce_decay: Check the decay contract of f first

    Returns:
        ScalarField1D: f_t at the nodes
    """
    cfg = cfg or Quadrature1DConfig()
    _require_1d(f, periodic=False, name='rhs_line')
    if enforce_decay:
        check_decay(f)
    cfg.truncation_radius(f.grid)
    if params.rho_bar == 0:
        return zeros_like(f)
    sums = _contour_sums(f, cfg, periodized=cfg.far_field)
    return f.with_samples((params.rho_bar / TWO_PI) * sums)


def rhs_1d(f: ScalarField1D, params, cfg: Optional[Quadrature1DConfig] = None,
           enforce_decay: bool = True) -> ScalarField1D:
    """Dispatch to rhs_periodic or rhs_line by grid kind."""
    if f.grid.is_periodic:
        return rhs_periodic(f, params, cfg)
    return rhs_line(f, params, cfg, enforce_decay=enforce_decay)


def locate_extremum(samples: np.ndarray, extremum: str = 'max'):
    """Lowest flat index attaining the max (or min) and whether it is tied."""
    if extremum not in ('max', 'min'):
        raise PreconditionError(f"extremum must be 'max' or 'min', got {extremum!r}")
    flat = np.ravel(samples)
    target = flat.max() if extremum == 'max' else flat.min()
    hits = np.flatnonzero(flat == target)
    return int(hits[0]), bool(hits.size > 1)


def rhs_at_extremum(f: ScalarField1D, params, cfg: Optional[Quadrature1DConfig] = None,
                    extremum: str = 'max') -> ExtremumValue:
    """
    Evaluate the extremum term I1 at the grid argmax (or argmin) of f.

    I1 = -(rho_bar / 2 pi) int (M - f(x_t - a)) / (a^2 + (M - f(x_t - a))^2) da

    with M = f(x_t). On a torus, and on a TruncatedLine with far_field set, the
    image-summed height kernel is used over the whole period. A constant field
    yields value 0 with the tie flag set.
    """
    cfg = cfg or Quadrature1DConfig()
    _require_1d(f, name='rhs_at_extremum')
    u = f.samples
    if float(np.ptp(u)) == 0.0:
        locate_extremum(u, extremum)
        return ExtremumValue(0, 0.0, True)
    index, tie = locate_extremum(u, extremum)
    if params.rho_bar == 0:
        return ExtremumValue(index, 0.0, tie)
    if not f.grid.is_periodic:
        check_decay(f)

    grid = f.grid
    stencil = _stencil(grid, cfg)
    wrap = _wraps(grid, cfg)
    source = _half_shifted(f).samples if stencil.half_shifted else u
    d = u[index] - _gather(source, index - stencil.shifts, wrap)
    if wrap:
        values = PeriodizedKernel(stencil.alphas, grid.length).height(d)
    else:
        values = d / (stencil.alphas ** 2 + d * d)
    total = float(np.sum(stencil.weights * values))
    if stencil.node_weight:
        p = derivative(f, enforce_decay=False).samples[index]
        q = derivative(f, order=2, enforce_decay=False).samples[index]
        total += stencil.node_weight * q * (p * p - 1.0) / (2.0 * (1.0 + p * p) ** 2)
    return ExtremumValue(index, -(params.rho_bar / TWO_PI) * total, tie)


def _g_function(x):
    return -x / (1.0 + x * x) + np.arctan(x)


def _g_derivative(x):
    return 2.0 * x * x / (1.0 + x * x) ** 2


def i2_residual(f: ScalarField1D, index: int, params,
                cfg: Optional[Quadrature1DConfig] = None) -> float:
    """
    Evaluate I2 = -(rho_bar / 2 pi) int d/da G((f(x) - f(x - a)) / a) da at a node.

    The integral over the line is taken on a window of RESIDUAL_PERIODS
    periods each side (the truncation radius on a TruncatedLine without
    far_field, reading zero beyond the box), and the exact remainder
    -G(u(R)) + G(u(-R)) beyond the window is added.

    Raises:
        PreconditionError: If |f'| at the node is not below 1e-6
    """
    cfg = cfg or Quadrature1DConfig()
    _require_1d(f, name='i2_residual')
    grid = f.grid
    n, h = grid.n, grid.spacing
    if not 0 <= index < n:
        raise PreconditionError(f"node index {index} outside the grid")
    fp = derivative(f).samples
    p = float(fp[index])
    if abs(p) >= EXTREMUM_SLOPE_LIMIT:
        raise PreconditionError(
            f"node {index} is not an extremum: |f'| = {abs(p):.3e} >= {EXTREMUM_SLOPE_LIMIT:.0e}"
        )
    if params.rho_bar == 0:
        return 0.0

    wrap = _wraps(grid, cfg)
    if wrap:
        reach = RESIDUAL_PERIODS * n
    else:
        reach = int(round(cfg.truncation_radius(grid) / h))
    shifts = np.arange(-reach, reach + 1)
    alphas = shifts * h
    raw = index - shifts
    u = f.samples
    d = u[index] - _gather(u, raw, wrap)
    centre = reach
    safe = np.where(shifts == 0, 1.0, alphas)
    slope = d / safe
    slope_rate = (_gather(fp, raw, wrap) * alphas - d) / safe ** 2
    slope[centre] = p
    slope_rate[centre] = -0.5 * derivative(f, order=2).samples[index]

    weights = np.full(shifts.size, h)
    weights[0] = weights[-1] = 0.5 * h
    total = float(np.sum(weights * _g_derivative(slope) * slope_rate))
    total -= float(_g_function(slope[-1]) - _g_function(slope[0]))
    return -(params.rho_bar / TWO_PI) * total


def _q_weight(delta, p):
    return 2.0 * (1.0 + p * delta) / (1.0 + delta * delta) ** 2


def _centred_offsets(n: int) -> np.ndarray:
    return np.arange(-n // 2 + 1, n // 2 + 1)


def _cot_half(offsets, period):
    """(s/2) cot(s b / 2), the image sum of 1/b, with the b = 0 entry set to 0."""
    s = TWO_PI / period
    tangent = np.tan(0.5 * s * offsets)
    return np.divide(0.5 * s, tangent, out=np.zeros_like(offsets), where=offsets != 0)


def _principal_sums(f: ScalarField1D, up, fpp) -> np.ndarray:
    """PV integral of the periodized kernel along each row."""
    grid = f.grid
    n, h = grid.n, grid.spacing
    shifts = _centred_offsets(n)
    shifts = shifts[shifts != 0]
    offsets = shifts * h
    kernel = PeriodizedKernel(offsets, grid.length)
    cot = _cot_half(offsets, grid.length)
    u = f.samples

    def evaluate(rows):
        idx = (rows[:, None] - shifts[None, :]) % n
        d = u[rows, None] - u[idx]
        p = up[rows, None]
        return np.sum(h * (kernel.odd(d) - cot / (1.0 + p * p)), axis=1)

    sums = _blocked_rows(np.arange(n), shifts.size, evaluate)
    return sums + h * up * fpp / (1.0 + up * up) ** 2


def _weight_integrals(f: ScalarField1D, rows: np.ndarray, up, fpp, fppp,
                      retain: bool = False):
    """
    Integral over the line of F(b) = (p - D/b) / b^2 * Q(D/b) along the given rows.

    Images |k| <= IMAGE_TERMS are summed explicitly; the remaining ones use
    the expansion 2p/v^2 + 2(p^2 - 1) D/v^3 - 6 p D^2/v^4 in v = b + kL with
    Hurwitz zeta tails. The 1/b singularity of the central image is removed
    with the cotangent kernel and its finite part inserted at b = 0.
    """
    grid = f.grid
    n, h, period = grid.n, grid.spacing, grid.length
    shifts = _centred_offsets(n)
    offsets = shifts * h
    centre = shifts == 0
    cot = _cot_half(offsets, period)
    u = f.samples

    upper = IMAGE_TERMS + 1 + offsets / period
    lower = IMAGE_TERMS + 1 - offsets / period
    tails = {
        j: (zeta(j, upper) + (-1) ** j * zeta(j, lower)) / period ** j
        for j in (2, 3, 4)
    }

    def evaluate(block):
        idx = (block[:, None] - shifts[None, :]) % n
        D = u[block, None] - u[idx]
        p = up[block, None]
        q = fpp[block, None]
        r = fppp[block, None]
        one_p2 = 1.0 + p * p
        total = np.zeros(D.shape)
        for k in range(-IMAGE_TERMS, IMAGE_TERMS + 1):
            shifted = offsets + k * period
            if k == 0:
                safe = np.where(centre, 1.0, shifted)
                delta = D / safe
                term = (p - delta) / safe ** 2 * _q_weight(delta, p) - (q / one_p2) * cot
                limit = -r / (3.0 * one_p2) + 1.5 * p * q * q / one_p2 ** 2
                term[:, centre] = limit
            else:
                delta = D / shifted
                term = (p - delta) / shifted ** 2 * _q_weight(delta, p)
            total += term
        total += (2.0 * p * tails[2] + 2.0 * (p * p - 1.0) * D * tails[3]
                  - 6.0 * p * D * D * tails[4])
        return np.sum(h * total, axis=1)

    integrals = _blocked_rows(rows, shifts.size * (2 * IMAGE_TERMS + 1), evaluate)

    weights = None
    if retain:
        idx = (np.arange(n)[:, None] - shifts[None, :]) % n
        D = u[:, None] - u[idx]
        safe = np.where(centre, 1.0, offsets)
        delta = D / safe
        delta[:, centre] = up[:, None]
        weights = _q_weight(delta, up[:, None])
    return integrals, weights


def slope_rhs(f: ScalarField1D, params, cfg: Optional[Quadrature1DConfig] = None,
              retain_weights: bool = False) -> SlopeDecomposition:
    """
    Split d/dt f' into n1 + n2.

    n1 = (rho_bar / 2 pi) f''(x) PV int a / (a^2 + (f(x) - f(x - a))^2) da
    n2 = -(rho_bar / 2 pi) PV int (f'(x) - D_a f(x)) / a^2 * Q(x, a) da

    with D_a f(x) = (f(x) - f(x - a)) / a and
    Q(x, a) = 2 (1 + f'(x) D_a f(x)) / (1 + (D_a f(x))^2)^2.

    Args:
        f: Periodic field
        params: Densities
        cfg: Quadrature settings; ignored, both parts always use collocated
            offsets over the full period
        retain_weights: Keep the Q samples of the central image

    Returns:
        SlopeDecomposition: n1, n2 and optionally Q
    """
    _require_1d(f, periodic=True, name='slope_rhs')
    up = derivative(f).samples
    fpp = derivative(f, order=2).samples
    fppp = derivative(f, order=3).samples
    coefficient = params.rho_bar / TWO_PI
    rows = np.arange(f.grid.n) if params.rho_bar != 0 else np.arange(0)
    integrals, weights = _weight_integrals(f, rows, up, fpp, fppp, retain=retain_weights)
    if params.rho_bar == 0:
        n1 = n2 = np.zeros(f.grid.n)
    else:
        n1 = coefficient * fpp * _principal_sums(f, up, fpp)
        n2 = -coefficient * integrals
    return SlopeDecomposition(f.with_samples(n1), f.with_samples(n2), weights)


def n2_at(f: ScalarField1D, params, index: int) -> float:
    """The n2 term of slope_rhs at a single node."""
    _require_1d(f, periodic=True, name='n2_at')
    if params.rho_bar == 0:
        return 0.0
    up = derivative(f).samples
    fpp = derivative(f, order=2).samples
    fppp = derivative(f, order=3).samples
    integrals, _ = _weight_integrals(f, np.array([index]), up, fpp, fppp)
    return float(-(params.rho_bar / TWO_PI) * integrals[0])


def arctan_form_rhs(f: ScalarField1D, params) -> ScalarField1D:
    """
    Evaluate f_t = (rho_bar / 2 pi) PV int d/dx arctan((f(x) - f(x - a)) / a) da.

    Each offset column arctan(tanh(s D/2) cot(s a/2)), the image sum of
    arctan(D / a), is differentiated spectrally in x before the trapezoid
    sum over a; the a = 0 column is arctan(f'(x)). Every column has zero
    mean, so the result does too.
    """
    _require_1d(f, periodic=True, name='arctan_form_rhs')
    if params.rho_bar == 0:
        return zeros_like(f)
    grid = f.grid
    n, h = grid.n, grid.spacing
    s = TWO_PI / grid.length
    k = grid.wavenumbers()
    symbol = 1j * k
    symbol[n // 2] = 0.0
    u = f.samples
    rows = np.arange(n)
    shifts = np.arange(1, n)
    per_block = max(1, BLOCK_ELEMENTS // n)
    blocks = [shifts[start:start + per_block] for start in range(0, shifts.size, per_block)]

    def evaluate(columns):
        angles = s * columns * h
        D = u[:, None] - u[(rows[:, None] - columns[None, :]) % n]
        values = np.arctan2(np.tanh(0.5 * s * D) * np.cos(0.5 * angles), np.sin(0.5 * angles))
        dx = np.fft.ifft(np.fft.fft(values, axis=0) * symbol[:, None], axis=0).real
        return np.sum(dx, axis=1)

    partials = parallel_map(evaluate, blocks)
    total = derivative(f.with_samples(np.arctan(derivative(f).samples))).samples.copy()
    for partial in partials:
        total += partial
    return f.with_samples((params.rho_bar / TWO_PI) * h * total)


def equivalent_form_rhs(f: ScalarField1D, params) -> ScalarField1D:
    """
    Evaluate f_t = (rho_bar / 2 pi) PV int (f'(x) a - D) / (a^2 + D^2) da, D = f(x) - f(x - a).

    Differs from the contour form by the exact derivative d/da arctan(D / a),
    so both agree up to quadrature error. The a = 0 node is f'' / (2 (1 + f'^2)).
    """
    _require_1d(f, periodic=True, name='equivalent_form_rhs')
    if params.rho_bar == 0:
        return zeros_like(f)
    grid = f.grid
    n, h = grid.n, grid.spacing
    shifts = np.arange(1, n)
    kernel = PeriodizedKernel(shifts * h, grid.length)
    u = f.samples
    up = derivative(f).samples
    fpp = derivative(f, order=2).samples

    def evaluate(rows):
        d = u[rows, None] - u[(rows[:, None] - shifts[None, :]) % n]
        return np.sum(h * (up[rows, None] * kernel.odd(d) - kernel.height(d)), axis=1)

    sums = _blocked_rows(np.arange(n), shifts.size, evaluate)
    sums = sums + h * fpp / (2.0 * (1.0 + up * up))
    return f.with_samples((params.rho_bar / TWO_PI) * sums)
