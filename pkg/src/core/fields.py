"""
Grids, sampled fields and discrete Fourier machinery.

This module provides the uniform grids on which interface heights are
sampled, the immutable field containers, the spectral operators (derivatives,
the half Laplacian Lambda, Riesz transforms) and the exact solver of the
linearized interface equation.

Spectra are normalized so that f(x) = sum_k fhat(k) exp(i k x), i.e.
fhat = fft(f) / n, which keeps every Fourier multiplier literal.
"""

import math
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ..utils.errors import ConfigurationError, DomainViolationError, PreconditionError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
MIN_POINTS = 8
# Outer fraction of a TruncatedLine box where samples must have decayed
DECAY_MARGIN = 0.05
DECAY_TOLERANCE = 1e-8


class DomainKind(Enum):
    PERIODIC_TORUS = 'periodic_torus'
    TRUNCATED_LINE = 'truncated_line'


class Regime(Enum):
    STABLE = 'stable'
    UNSTABLE = 'unstable'
    DEGENERATE = 'degenerate'


def _check_count(n, name='n'):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise ConfigurationError(f"{name} must be an integer, got {n!r}")
    if n < MIN_POINTS:
        raise ConfigurationError(f"{name} must be at least {MIN_POINTS}, got {n}")
    if n % 2:
        raise ConfigurationError(f"{name} must be even, got {n}")


def _check_length(length, name='length'):
    if not (isinstance(length, (int, float, np.floating)) and math.isfinite(length)
            and length > 0):
        raise ConfigurationError(f"{name} must be a positive real, got {length!r}")


@dataclass(frozen=True)
class GridSpec1D:
    """
    Uniform 1-D grid.

    PeriodicTorus nodes sit at x_j = j * spacing. TruncatedLine boxes are
    centred on the origin, x_j = -length/2 + j * spacing, and are embedded
    periodically with enforced decay near both ends.
    """

    n: int
    length: float = TWO_PI
    kind: DomainKind = DomainKind.PERIODIC_TORUS

    def __post_init__(self):
        _check_count(self.n)
        _check_length(self.length)
        if not isinstance(self.kind, DomainKind):
            raise ConfigurationError(f"unknown domain kind {self.kind!r}")
        if self.kind is DomainKind.TRUNCATED_LINE and self.length < 2.0 * TWO_PI - 1e-12:
            raise ConfigurationError(
                f"TruncatedLine requires length >= 4*pi, got {self.length}"
            )

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @property
    def origin(self) -> float:
        return -0.5 * self.length if self.kind is DomainKind.TRUNCATED_LINE else 0.0

    @property
    def is_periodic(self) -> bool:
        return self.kind is DomainKind.PERIODIC_TORUS

    @property
    def shape(self):
        return (self.n,)

    def nodes(self) -> np.ndarray:
        return self.origin + np.arange(self.n) * self.spacing

    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers in fft order (integers on a 2*pi period)."""
        return np.fft.fftfreq(self.n, d=self.spacing) * TWO_PI


@dataclass(frozen=True)
class GridSpec2D:
    """Uniform periodic grid on a torus; samples are stored row-major as [i1, i2]."""

    n1: int
    n2: int
    length1: float = TWO_PI
    length2: float = TWO_PI

    def __post_init__(self):
        _check_count(self.n1, 'n1')
        _check_count(self.n2, 'n2')
        _check_length(self.length1, 'length1')
        _check_length(self.length2, 'length2')

    @property
    def kind(self) -> DomainKind:
        return DomainKind.PERIODIC_TORUS

    @property
    def is_periodic(self) -> bool:
        return True

    @property
    def spacing1(self) -> float:
        return self.length1 / self.n1

    @property
    def spacing2(self) -> float:
        return self.length2 / self.n2

    @property
    def shape(self):
        return (self.n1, self.n2)

    def nodes(self):
        """Return the (x1, x2) node arrays with ij indexing."""
        x1 = np.arange(self.n1) * self.spacing1
        x2 = np.arange(self.n2) * self.spacing2
        return np.meshgrid(x1, x2, indexing='ij')

    def wavenumbers(self):
        """Return (xi1, xi2) broadcastable wavenumber arrays in fft order."""
        k1 = np.fft.fftfreq(self.n1, d=self.spacing1) * TWO_PI
        k2 = np.fft.fftfreq(self.n2, d=self.spacing2) * TWO_PI
        return k1[:, None], k2[None, :]


Grid = Union[GridSpec1D, GridSpec2D]


def _frozen_samples(grid, samples) -> np.ndarray:
    values = np.array(samples, dtype=float)
    if values.shape != grid.shape:
        raise DomainViolationError(
            f"expected {grid.shape} samples for the grid, got {values.shape}"
        )
    if not np.all(np.isfinite(values)):
        raise DomainViolationError("field contains non-finite samples")
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class ScalarField1D:
    """Interface height sampled on a GridSpec1D. Samples are read-only."""

    grid: GridSpec1D
    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'samples', _frozen_samples(self.grid, self.samples))

    @property
    def dimension(self) -> int:
        return 1

    def with_samples(self, samples) -> 'ScalarField1D':
        return ScalarField1D(self.grid, samples)


@dataclass(frozen=True, eq=False)
class ScalarField2D:
    """Interface height sampled on a GridSpec2D. Samples are read-only."""

    grid: GridSpec2D
    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'samples', _frozen_samples(self.grid, self.samples))

    @property
    def dimension(self) -> int:
        return 2

    def with_samples(self, samples) -> 'ScalarField2D':
        return ScalarField2D(self.grid, samples)


ScalarField = Union[ScalarField1D, ScalarField2D]


@dataclass(frozen=True)
class PhysParams:
    """Fluid densities; rho_bar = rho2 - rho1 with fluid 2 below the interface."""

    rho1: float
    rho2: float

    def __post_init__(self):
        for name in ('rho1', 'rho2'):
            value = getattr(self, name)
            if not (isinstance(value, (int, float, np.floating)) and math.isfinite(value)
                    and value >= 0):
                raise ConfigurationError(f"{name} must be a nonnegative real, got {value!r}")

    @property
    def rho_bar(self) -> float:
        return float(self.rho2) - float(self.rho1)

    @property
    def regime(self) -> Regime:
        if self.rho_bar > 0:
            return Regime.STABLE
        if self.rho_bar < 0:
            return Regime.UNSTABLE
        return Regime.DEGENERATE

    @classmethod
    def from_jump(cls, rho_bar: float) -> 'PhysParams':
        """Densities (0, rho_bar) or (-rho_bar, 0) realizing the given jump."""
        if rho_bar >= 0:
            return cls(0.0, float(rho_bar))
        return cls(float(-rho_bar), 0.0)


@dataclass(frozen=True, eq=False)
class Spectrum1D:
    grid: GridSpec1D
    coefficients: np.ndarray

    def mode(self, k: int) -> complex:
        """Coefficient of exp(i k x) for an integer wavenumber on a 2*pi period."""
        return complex(self.coefficients[k % self.grid.n])


@dataclass(frozen=True, eq=False)
class Spectrum2D:
    grid: GridSpec2D
    coefficients: np.ndarray

    def mode(self, k1: int, k2: int) -> complex:
        return complex(self.coefficients[k1 % self.grid.n1, k2 % self.grid.n2])


Spectrum = Union[Spectrum1D, Spectrum2D]


def make_grid(n: int, length: float = TWO_PI,
              kind: DomainKind = DomainKind.PERIODIC_TORUS) -> GridSpec1D:
    """
    Build a 1-D grid.

    Args:
        n: Even sample count, at least 8
        length: Period or truncation width
        kind: PeriodicTorus or TruncatedLine

    Returns:
        GridSpec1D: The grid

    Raises:
        ConfigurationError: On odd or small n, or nonpositive length
    """
    if isinstance(kind, str):
        try:
            kind = DomainKind(kind)
        except ValueError:
            raise ConfigurationError(f"unknown domain kind {kind!r}") from None
    return GridSpec1D(n, float(length), kind)


def make_grid_2d(n1: int, n2: Optional[int] = None, length1: float = TWO_PI,
                 length2: Optional[float] = None) -> GridSpec2D:
    return GridSpec2D(n1, n1 if n2 is None else n2, float(length1),
                      float(length1 if length2 is None else length2))


def make_field(grid: Grid, samples) -> ScalarField:
    if isinstance(grid, GridSpec2D):
        return ScalarField2D(grid, samples)
    return ScalarField1D(grid, samples)


def field_from_function(grid: Grid, fn: Callable) -> ScalarField:
    """Sample fn at the grid nodes (fn(x) in 1-D, fn(x1, x2) in 2-D)."""
    if isinstance(grid, GridSpec2D):
        x1, x2 = grid.nodes()
        return ScalarField2D(grid, np.broadcast_to(fn(x1, x2), grid.shape))
    return ScalarField1D(grid, np.broadcast_to(fn(grid.nodes()), grid.shape))


def zeros_like(f: ScalarField) -> ScalarField:
    return f.with_samples(np.zeros(f.grid.shape))


def stable_sum(values) -> float:
    """Order-fixed, correctly rounded sum of a flat sequence."""
    return math.fsum(np.ravel(values))


def transform(f: ScalarField) -> Spectrum:
    """Forward transform, fhat = fft(f) / n."""
    if isinstance(f, ScalarField2D):
        n = f.grid.n1 * f.grid.n2
        return Spectrum2D(f.grid, np.fft.fft2(f.samples) / n)
    return Spectrum1D(f.grid, np.fft.fft(f.samples) / f.grid.n)


def inverse_transform(spectrum: Spectrum) -> ScalarField:
    """Inverse of transform; the imaginary round-off is discarded."""
    if isinstance(spectrum, Spectrum2D):
        n = spectrum.grid.n1 * spectrum.grid.n2
        return ScalarField2D(spectrum.grid, np.fft.ifft2(spectrum.coefficients * n).real)
    return ScalarField1D(spectrum.grid, np.fft.ifft(spectrum.coefficients * spectrum.grid.n).real)


def apply_multiplier(f: ScalarField, multiplier: np.ndarray) -> ScalarField:
    """Apply a Fourier multiplier given in fft order."""
    if isinstance(f, ScalarField2D):
        return f.with_samples(np.fft.ifft2(np.fft.fft2(f.samples) * multiplier).real)
    return f.with_samples(np.fft.ifft(np.fft.fft(f.samples) * multiplier).real)


def _derivative_symbol(k: np.ndarray, order: int) -> np.ndarray:
    symbol = (1j * k) ** order
    if order % 2:
        # The Nyquist mode has no odd-order derivative on a real grid
        n = k.size
        symbol = symbol.copy()
        symbol.reshape(-1)[n // 2] = 0.0
    return symbol


def check_decay(f: ScalarField1D) -> None:
    """
    Enforce the TruncatedLine decay contract.

    Raises:
        DomainViolationError: If any sample in the outer margin exceeds the tolerance
    """
    n = f.grid.n
    margin = max(1, int(math.ceil(DECAY_MARGIN * n)))
    edges = np.concatenate([f.samples[:margin], f.samples[n - margin:]])
    worst = float(np.max(np.abs(edges)))
    if worst > DECAY_TOLERANCE:
        raise DomainViolationError(
            f"TruncatedLine field does not decay: |f| = {worst:.3e} within "
            f"{DECAY_MARGIN:.0%} of the boundary (limit {DECAY_TOLERANCE:.0e})"
        )


def derivative(f: ScalarField, axis: int = 0, order: int = 1,
               enforce_decay: bool = True) -> ScalarField:
    """
    Spectral derivative along one axis.

    Args:
        f: Periodic field, or a decaying TruncatedLine field
        axis: 0 for x (or x1), 1 for x2
        order: Derivative order, at least 1
        enforce_decay: Check the TruncatedLine decay contract first

    Returns:
        ScalarField: The derivative

    Raises:
        DomainViolationError: If a TruncatedLine field has not decayed
    """
    if order < 1:
        raise PreconditionError(f"derivative order must be positive, got {order}")
    if isinstance(f, ScalarField2D):
        if axis not in (0, 1):
            raise PreconditionError(f"axis must be 0 or 1, got {axis}")
        k1, k2 = f.grid.wavenumbers()
        if axis == 0:
            symbol = _derivative_symbol(k1.ravel(), order)[:, None]
        else:
            symbol = _derivative_symbol(k2.ravel(), order)[None, :]
        return apply_multiplier(f, symbol)

    if axis != 0:
        raise PreconditionError(f"a 1-D field has only axis 0, got {axis}")
    if enforce_decay and not f.grid.is_periodic:
        check_decay(f)
    return apply_multiplier(f, _derivative_symbol(f.grid.wavenumbers(), order))


def gradient(f: ScalarField2D):
    return derivative(f, 0), derivative(f, 1)


def _abs_wavenumber(grid: Grid) -> np.ndarray:
    if isinstance(grid, GridSpec2D):
        k1, k2 = grid.wavenumbers()
        return np.sqrt(k1 ** 2 + k2 ** 2)
    return np.abs(grid.wavenumbers())


def lambda_op(f: ScalarField) -> ScalarField:
    """Half Laplacian: multiplier |xi|."""
    return apply_multiplier(f, _abs_wavenumber(f.grid))


def riesz(f: ScalarField2D, axis: int) -> ScalarField2D:
    """Riesz transform R_axis with multiplier -i xi_axis / |xi| (zero at xi = 0)."""
    if not isinstance(f, ScalarField2D):
        raise PreconditionError("riesz transform needs a 2-D field")
    if axis not in (0, 1):
        raise PreconditionError(f"axis must be 0 or 1, got {axis}")
    k1, k2 = f.grid.wavenumbers()
    xi = np.broadcast_to(k1 if axis == 0 else k2, f.grid.shape)
    modulus = np.broadcast_to(np.sqrt(k1 ** 2 + k2 ** 2), f.grid.shape)
    symbol = np.zeros(f.grid.shape, dtype=complex)
    nonzero = modulus > 0
    symbol[nonzero] = -1j * xi[nonzero] / modulus[nonzero]
    nyquist = f.grid.shape[axis] // 2
    if axis == 0:
        symbol[nyquist, :] = 0.0
    else:
        symbol[:, nyquist] = 0.0
    return apply_multiplier(f, symbol)


def linear_multiplier(grid: Grid, rho_bar: float, t: float) -> np.ndarray:
    """exp(-(rho_bar/2) |xi| t) in fft order."""
    return np.exp(-0.5 * rho_bar * _abs_wavenumber(grid) * t)


def linear_evolve(f0: ScalarField, t: float, params: PhysParams) -> ScalarField:
    """
    Exact solution of the linearized interface equation.

    Args:
        f0: Periodic initial field
        t: Time, nonnegative
        params: Densities

    Returns:
        ScalarField: f at time t
    """
    if t < 0:
        raise PreconditionError(f"linear_evolve needs t >= 0, got {t}")
    if not f0.grid.is_periodic:
        raise DomainViolationError("linear_evolve needs a periodic grid")
    if t == 0:
        return f0
    return apply_multiplier(f0, linear_multiplier(f0.grid, params.rho_bar, t))


def cell_area(grid: Grid) -> float:
    if isinstance(grid, GridSpec2D):
        return grid.spacing1 * grid.spacing2
    return grid.spacing


def domain_measure(grid: Grid) -> float:
    if isinstance(grid, GridSpec2D):
        return grid.length1 * grid.length2
    return grid.length


@dataclass(frozen=True)
class FieldNorms:
    linf: float
    l1: float
    mean: float
    min: float
    max: float
    max_slope: float

    def to_dict(self):
        return {
            'linf': self.linf, 'l1': self.l1, 'mean': self.mean,
            'min': self.min, 'max': self.max, 'max_slope': self.max_slope
        }


def slope_magnitude(f: ScalarField) -> np.ndarray:
    """|f'| in 1-D, |grad f| in 2-D."""
    if isinstance(f, ScalarField2D):
        g1, g2 = gradient(f)
        return np.hypot(g1.samples, g2.samples)
    return np.abs(derivative(f, enforce_decay=False).samples)


def norms(f: ScalarField) -> FieldNorms:
    """
    Grid norms of a field.

    L1 and mean use the spacing-weighted grid quadrature with an exactly
    rounded sum; max_slope is the sup of the spectral slope.
    """
    samples = f.samples
    weight = cell_area(f.grid)
    fmax = float(np.max(samples))
    fmin = float(np.min(samples))
    return FieldNorms(
        linf=max(abs(fmax), abs(fmin)),
        l1=weight * stable_sum(np.abs(samples)),
        mean=weight * stable_sum(samples) / domain_measure(f.grid),
        min=fmin,
        max=fmax,
        max_slope=float(np.max(slope_magnitude(f))),
    )


def grid_mean(f: ScalarField) -> float:
    return stable_sum(f.samples) / f.samples.size


def shift(f: ScalarField, steps: Union[int, Sequence[int]]) -> ScalarField:
    """Grid-aligned translation: result[j] = f[j - steps]."""
    axes = (0, 1) if isinstance(f, ScalarField2D) else 0
    return f.with_samples(np.roll(f.samples, steps, axis=axes))


def reflect(f: ScalarField1D) -> ScalarField1D:
    """x -> -x about the grid origin (index j -> -j mod n)."""
    return f.with_samples(np.roll(f.samples[::-1], 1))


def _pad_axis(coefficients: np.ndarray, size: int, axis: int) -> np.ndarray:
    n = coefficients.shape[axis]
    half = n // 2
    moved = np.moveaxis(coefficients, axis, 0)
    padded = np.zeros((size,) + moved.shape[1:], dtype=complex)
    padded[:half] = moved[:half]
    padded[size - half + 1:] = moved[half + 1:]
    # split the Nyquist mode symmetrically
    padded[half] = 0.5 * moved[half]
    padded[size - half] += 0.5 * moved[half]
    return np.moveaxis(padded, 0, axis)


def refine(f: ScalarField, factor: int) -> ScalarField:
    """Spectral upsampling by zero padding; nodes of f are reproduced exactly."""
    if factor < 1:
        raise PreconditionError(f"refine factor must be positive, got {factor}")
    if factor == 1:
        return f
    if isinstance(f, ScalarField2D):
        grid = GridSpec2D(f.grid.n1 * factor, f.grid.n2 * factor,
                          f.grid.length1, f.grid.length2)
        coefficients = np.fft.fft2(f.samples) / f.samples.size
        coefficients = _pad_axis(coefficients, grid.n1, 0)
        coefficients = _pad_axis(coefficients, grid.n2, 1)
        return ScalarField2D(grid, np.fft.ifft2(coefficients * grid.n1 * grid.n2).real)
    grid = GridSpec1D(f.grid.n * factor, f.grid.length, f.grid.kind)
    coefficients = _pad_axis(np.fft.fft(f.samples) / f.grid.n, grid.n, 0)
    return ScalarField1D(grid, np.fft.ifft(coefficients * grid.n).real)


def interpolate(f: ScalarField, points) -> np.ndarray:
    """
    Evaluate the trigonometric interpolant of f at arbitrary points.

    Args:
        f: Field
        points: Array of x values (1-D) or of (x1, x2) rows (2-D)

    Returns:
        np.ndarray: Interpolated values, one per point
    """
    spectrum = transform(f).coefficients
    if isinstance(f, ScalarField2D):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        k1, k2 = f.grid.wavenumbers()
        # Nyquist rows evaluate as cosines
        e1 = np.exp(1j * np.outer(pts[:, 0], k1.ravel()))
        e2 = np.exp(1j * np.outer(pts[:, 1], k2.ravel()))
        return np.einsum('pi,ij,pj->p', e1, spectrum, e2).real
    x = np.atleast_1d(np.asarray(points, dtype=float)) - f.grid.origin
    phases = np.exp(1j * np.outer(x, f.grid.wavenumbers()))
    return (phases @ spectrum).real
