"""
Right-hand side of the 2-D interface equation and the off-interface velocity.

The interface x3 = f(x1, x2) evolves by

    f_t(x) = (rho_bar / 4 pi) int (grad f(x) - grad f(x - y)) . y / (|y|^2 + (f(x) - f(x - y))^2)^(3/2) dy

over the plane. On the torus the integral is taken on the lattice of grid
offsets inside a disk covering image_layers periodic shells, weighted by a
smooth radial window. The part of the linearized integral cut off by the
window is restored exactly in Fourier space. The integrable 1/|y|
singularity at y = 0 is either punctured or removed with its local polar
expansion.
"""

import math
import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import itj0y0, j0, j1

from .fields import (
    TWO_PI, GridSpec1D, GridSpec2D, ScalarField1D, ScalarField2D, apply_multiplier,
    derivative, gradient, grid_mean, interpolate, refine, transform, zeros_like
)
from .muskat1d import Quadrature1DConfig, locate_extremum, rhs_periodic
from ..utils.errors import (
    ConfigParseError, ConfigurationError, DomainViolationError, PreconditionError
)
from ..utils.parallel import parallel_map

logger = logging.getLogger(__name__)

BLOCK_ELEMENTS = 1 << 18
MAX_IMAGE_LAYERS = 4
MIN_PATCH_RINGS = 4
LARGE_GRID_POINTS = 96 * 96
# Angular nodes used for the polar integral of the singular profile
PATCH_ANGLES = 64
VELOCITY_REFINEMENT = 4
_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(16)


class SingularRule2D(Enum):
    PUNCTURE_CELL = 'puncture_cell'
    POLAR_PATCH = 'polar_patch'


@dataclass(frozen=True)
class Quadrature2DConfig:
    """
    Quadrature settings for the 2-D kernels.

    Attributes:
        image_layers: Periodic shells beyond the centred cell; the lattice
            disk has radius (image_layers + 1/2) * min(length1, length2)
        singular_rule: PunctureCell omits y = 0; PolarPatch subtracts the
            local expansion within polar_patch_rings cells and adds its
            exact polar integral
        polar_patch_rings: Patch radius in grid cells
        far_field: Restore the linear part cut off by the window
        allow_large_grid: Permit grids above 96 x 96
    """

    image_layers: int = 1
    singular_rule: SingularRule2D = SingularRule2D.PUNCTURE_CELL
    polar_patch_rings: int = 8
    far_field: bool = True
    allow_large_grid: bool = False

    def __post_init__(self):
        if not isinstance(self.singular_rule, SingularRule2D):
            raise ConfigurationError(f"unknown 2-D singular rule {self.singular_rule!r}")
        if not (0 <= self.image_layers <= MAX_IMAGE_LAYERS):
            raise ConfigurationError(
                f"image_layers must lie in [0, {MAX_IMAGE_LAYERS}], got {self.image_layers}"
            )
        if self.polar_patch_rings < MIN_PATCH_RINGS:
            raise ConfigurationError(
                f"polar_patch_rings must be at least {MIN_PATCH_RINGS}, "
                f"got {self.polar_patch_rings}"
            )

    def window_radius(self, grid: GridSpec2D) -> float:
        return (self.image_layers + 0.5) * min(grid.length1, grid.length2)

    def check_grid(self, grid: GridSpec2D) -> None:
        if grid.n1 * grid.n2 > LARGE_GRID_POINTS and not self.allow_large_grid:
            raise ConfigurationError(
                f"grid {grid.n1}x{grid.n2} exceeds 96x96; set grid.allow_large to run it"
            )


@dataclass(frozen=True)
class VelocitySample:
    position: Tuple[float, float, float]
    velocity: Tuple[float, float, float]


@dataclass(frozen=True)
class ExtremumValue2D:
    index: Tuple[int, int]
    value: float
    tie: bool = False


@dataclass(frozen=True)
class VelocityProbe:
    """v3 above a grid extremum, extrapolated to the interface."""

    index: Tuple[int, int]
    limit: float
    samples: Tuple[VelocitySample, ...]


def smoothstep(s):
    """C-infinity step from 0 at s <= 0 to 1 at s >= 1."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    rising = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
    falling = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return rising / (rising + falling)


def radial_window(t):
    """1 on [0, 1/3], smooth decay to 0 at t = 1."""
    return 1.0 - smoothstep((np.asarray(t, dtype=float) - 1.0 / 3.0) * 1.5)


def _patch_cutoff(t):
    """1 at t = 0, 0 for t >= 1; integrates to 1/2 over [0, 1]."""
    return np.where(np.asarray(t) < 1.0, 1.0 - smoothstep(t), 0.0)


def _panel_integral(func, edges: np.ndarray) -> np.ndarray:
    """Gauss-Legendre over consecutive panels; func maps abscissae (T,) to (..., T)."""
    left, right = edges[:-1], edges[1:]
    mid = 0.5 * (left + right)
    half = 0.5 * (right - left)
    nodes = (mid[:, None] + half[:, None] * _GAUSS_NODES[None, :]).ravel()
    weights = (half[:, None] * _GAUSS_WEIGHTS[None, :]).ravel()
    return np.sum(func(nodes) * weights, axis=-1)


def _oscillation_edges(start: float, stop: float, k_max: float) -> np.ndarray:
    panels = max(8, int(math.ceil((stop - start) * k_max / 2.0)))
    return np.linspace(start, stop, panels + 1)


def _bessel_j1_ratio_integral(x):
    """int_0^x J1(u)/u du."""
    x = np.asarray(x, dtype=float)
    return itj0y0(x)[0] - j1(x)


def _j0_tail_integral(x):
    """int_x^inf J0(u)/u^2 du for x > 0."""
    x = np.asarray(x, dtype=float)
    return j0(x) / x - 1.0 + _bessel_j1_ratio_integral(x)


@dataclass(frozen=True, eq=False)
class _Lattice:
    a: np.ndarray
    b: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    r: np.ndarray
    weights: np.ndarray
    patch: np.ndarray


@lru_cache(maxsize=16)
def _lattice(grid: GridSpec2D, radius: float, patch_radius: float) -> _Lattice:
    h1, h2 = grid.spacing1, grid.spacing2
    m1 = int(math.floor(radius / h1))
    m2 = int(math.floor(radius / h2))
    a, b = np.meshgrid(np.arange(-m1, m1 + 1), np.arange(-m2, m2 + 1), indexing='ij')
    a, b = a.ravel(), b.ravel()
    y1, y2 = a * h1, b * h2
    r = np.hypot(y1, y2)
    keep = (r > 0) & (r < radius)
    a, b, y1, y2, r = a[keep], b[keep], y1[keep], y2[keep], r[keep]
    weights = radial_window(r / radius) * (h1 * h2)
    patch = _patch_cutoff(r / patch_radius) if patch_radius > 0 else np.zeros_like(r)
    logger.debug(f"Lattice for {grid.n1}x{grid.n2}, radius {radius:.4g}: {r.size} offsets")
    return _Lattice(a, b, y1, y2, r, weights, patch)


def _abs_wavenumbers(grid: GridSpec2D):
    k1, k2 = grid.wavenumbers()
    return np.sqrt(k1 ** 2 + k2 ** 2)


def _unique_map(values: np.ndarray):
    rounded = np.round(values, 12)
    unique, inverse = np.unique(rounded, return_inverse=True)
    return unique, inverse.reshape(values.shape)


@lru_cache(maxsize=16)
def _far_field_multiplier(grid: GridSpec2D, radius: float) -> np.ndarray:
    """
    Linear multiplier of the part of the integral cut off by the window.

    -(|xi| / 2) [1 - int_0^1 W(t) J1(|xi| A t) / t dt], without the rho_bar factor.
    """
    k = _abs_wavenumbers(grid)
    unique, inverse = _unique_map(k)
    scaled = unique * radius
    inner = _bessel_j1_ratio_integral(scaled / 3.0)
    edges = _oscillation_edges(1.0 / 3.0, 1.0, float(scaled.max()))

    def integrand(t):
        return radial_window(t)[None, :] * j1(scaled[:, None] * t[None, :]) / t[None, :]

    windowed = inner + _panel_integral(integrand, edges)
    multiplier = -0.5 * unique * (1.0 - windowed)
    return multiplier[inverse]


@lru_cache(maxsize=16)
def _far_height_transfer(grid: GridSpec2D, radius: float) -> np.ndarray:
    """T0(|xi|) = int_0^inf (1 - W(r/A)) J0(|xi| r) / r^2 dr in fft order."""
    k = _abs_wavenumbers(grid)
    unique, inverse = _unique_map(k)
    edges = _oscillation_edges(radius / 3.0, radius, float(unique.max()))

    def integrand(r):
        return (1.0 - radial_window(r / radius))[None, :] * j0(unique[:, None] * r[None, :]) \
            / (r * r)[None, :]

    body = _panel_integral(integrand, edges)
    tail = np.empty_like(unique)
    positive = unique > 0
    tail[positive] = unique[positive] * _j0_tail_integral(unique[positive] * radius)
    tail[~positive] = 1.0 / radius
    return (body + tail)[inverse]


def _require_2d(f, name):
    if not isinstance(f, ScalarField2D):
        raise DomainViolationError(f"{name} needs a 2-D field on a periodic torus")


def _hessian(f: ScalarField2D):
    f1 = derivative(f, 0)
    return (derivative(f, 0, 2).samples, derivative(f1, 1).samples,
            derivative(f, 1, 2).samples)


def _patch_terms(patch_offsets, hessian, slope, profile):
    """
    Lattice sum of the singular profile under the cutoff, and its exact integral
    up to the factor patch_radius / 2.

    profile(c, a) gives the angular factor of the 1/|y| singularity with
    c = y^T H y / |y|^2 and a = grad f . y / |y|.
    """
    h11, h12, h22 = hessian
    p1, p2 = slope
    u1, u2, r, weight = patch_offsets
    c = h11[:, None] * u1 * u1 + 2.0 * h12[:, None] * u1 * u2 + h22[:, None] * u2 * u2
    a = p1[:, None] * u1 + p2[:, None] * u2
    lattice = np.sum(weight * profile(c, a) / r, axis=1)

    theta = TWO_PI * np.arange(PATCH_ANGLES) / PATCH_ANGLES
    e1, e2 = np.cos(theta)[None, :], np.sin(theta)[None, :]
    c = h11[:, None] * e1 * e1 + 2.0 * h12[:, None] * e1 * e2 + h22[:, None] * e2 * e2
    a = p1[:, None] * e1 + p2[:, None] * e2
    polar = (TWO_PI / PATCH_ANGLES) * np.sum(profile(c, a), axis=1)
    return lattice, polar


def _rhs_profile(c, a):
    return c / (1.0 + a * a) ** 1.5


def _extremum_profile(c, a):
    return -0.5 * c * (1.0 - 2.0 * a * a) / (1.0 + a * a) ** 2.5


def _patch_offsets(lattice: _Lattice):
    inside = lattice.patch > 0
    r = lattice.r[inside]
    return (lattice.y1[inside] / r, lattice.y2[inside] / r, r,
            lattice.weights[inside] * lattice.patch[inside])


def rhs_2d(f: ScalarField2D, params, cfg: Optional[Quadrature2DConfig] = None) -> ScalarField2D:
    """
    Evaluate f_t on the torus.

    Args:
        f: Interface height
        params: Densities
        cfg: Quadrature settings

    Returns:
        ScalarField2D: f_t at the nodes
    """
    cfg = cfg or Quadrature2DConfig()
    _require_2d(f, 'rhs_2d')
    grid = f.grid
    cfg.check_grid(grid)
    if params.rho_bar == 0:
        return zeros_like(f)

    n1, n2 = grid.shape
    radius = cfg.window_radius(grid)
    polar = cfg.singular_rule is SingularRule2D.POLAR_PATCH
    patch_radius = cfg.polar_patch_rings * min(grid.spacing1, grid.spacing2) if polar else 0.0
    lattice = _lattice(grid, radius, patch_radius)

    u = f.samples.ravel()
    g1, g2 = (g.samples.ravel() for g in gradient(f))
    r2 = lattice.r * lattice.r
    chunk = max(1, BLOCK_ELEMENTS // 512)
    nodes = np.arange(n1 * n2)
    blocks = [nodes[start:start + 512] for start in range(0, nodes.size, 512)]

    def evaluate(block):
        i1, i2 = block // n2, block % n2
        total = np.zeros(block.size)
        for start in range(0, lattice.r.size, chunk):
            part = slice(start, start + chunk)
            src = ((i1[:, None] - lattice.a[None, part]) % n1) * n2 \
                + (i2[:, None] - lattice.b[None, part]) % n2
            d = u[block, None] - u[src]
            numerator = (g1[block, None] - g1[src]) * lattice.y1[part] \
                + (g2[block, None] - g2[src]) * lattice.y2[part]
            denominator = r2[part] + d * d
            total += np.sum(lattice.weights[part] * numerator
                            / (denominator * np.sqrt(denominator)), axis=1)
        return total

    sums = np.concatenate(parallel_map(evaluate, blocks))

    if polar:
        lattice_part, polar_part = _patch_terms(
            _patch_offsets(lattice), tuple(h.ravel() for h in _hessian(f)), (g1, g2),
            _rhs_profile
        )
        sums = sums - lattice_part + 0.5 * patch_radius * polar_part

    result = (params.rho_bar / (2.0 * TWO_PI)) * sums.reshape(grid.shape)
    if cfg.far_field:
        far = apply_multiplier(f, _far_field_multiplier(grid, radius)).samples
        result = result + params.rho_bar * far
    return f.with_samples(result)


def rhs_2d_at_extremum(f: ScalarField2D, params, cfg: Optional[Quadrature2DConfig] = None,
                       extremum: str = 'max') -> ExtremumValue2D:
    """
    Evaluate the extremum term J1 at the grid argmax (or argmin).

    J1 = -(rho_bar / 4 pi) int (M - f(x_t - y)) / (|y|^2 + (M - f(x_t - y))^2)^(3/2) dy
    """
    cfg = cfg or Quadrature2DConfig()
    _require_2d(f, 'rhs_2d_at_extremum')
    grid = f.grid
    cfg.check_grid(grid)
    u = f.samples
    if float(np.ptp(u)) == 0.0:
        locate_extremum(u, extremum)
        return ExtremumValue2D((0, 0), 0.0, True)
    flat, tie = locate_extremum(u, extremum)
    i1, i2 = divmod(flat, grid.n2)
    if params.rho_bar == 0:
        return ExtremumValue2D((i1, i2), 0.0, tie)

    n1, n2 = grid.shape
    radius = cfg.window_radius(grid)
    polar = cfg.singular_rule is SingularRule2D.POLAR_PATCH
    patch_radius = cfg.polar_patch_rings * min(grid.spacing1, grid.spacing2) if polar else 0.0
    lattice = _lattice(grid, radius, patch_radius)

    peak = u[i1, i2]
    d = peak - u[(i1 - lattice.a) % n1, (i2 - lattice.b) % n2]
    denominator = lattice.r * lattice.r + d * d
    total = float(np.sum(lattice.weights * d / (denominator * np.sqrt(denominator))))

    if polar:
        h11, h12, h22 = (h[i1, i2:i2 + 1] for h in _hessian(f))
        p1, p2 = (g.samples[i1, i2:i2 + 1] for g in gradient(f))
        lattice_part, polar_part = _patch_terms(
            _patch_offsets(lattice), (h11, h12, h22), (p1, p2), _extremum_profile
        )
        total += float(-lattice_part[0] + 0.5 * patch_radius * polar_part[0])

    if cfg.far_field:
        transfer = _far_height_transfer(grid, radius)
        smoothed = apply_multiplier(f, transfer).samples[i1, i2]
        total += TWO_PI * (peak * float(transfer[0, 0]) - smoothed)

    return ExtremumValue2D((i1, i2), -(params.rho_bar / (2.0 * TWO_PI)) * total, tie)


def reduce_consistency(f1d: ScalarField1D, params, cfg2d: Optional[Quadrature2DConfig] = None,
                       cfg1d: Optional[Quadrature1DConfig] = None,
                       n2: Optional[int] = None) -> dict:
    """
    Compare rhs_2d of an x1-only field with rhs_periodic of its profile.

    Args:
        f1d: Periodic 1-D profile
        params: Densities
        cfg2d: 2-D quadrature settings
        cfg1d: 1-D quadrature settings
        n2: Samples along x2 (defaults to the profile's n)

    Returns:
        dict: l_inf_gap, plus the two right-hand sides' sup norms
    """
    if not isinstance(f1d, ScalarField1D) or not f1d.grid.is_periodic:
        raise DomainViolationError("reduce_consistency needs a periodic 1-D profile")
    n2 = f1d.grid.n if n2 is None else n2
    grid = GridSpec2D(f1d.grid.n, n2, f1d.grid.length, f1d.grid.length)
    extended = ScalarField2D(grid, np.repeat(f1d.samples[:, None], n2, axis=1))
    two = rhs_2d(extended, params, cfg2d).samples
    one = rhs_periodic(f1d, params, cfg1d).samples
    gap = float(np.max(np.abs(two - one[:, None])))
    logger.debug(f"Reduction gap {gap:.3e} on {grid.n1}x{grid.n2}")
    return {
        'l_inf_gap': gap,
        'rhs_2d_linf': float(np.max(np.abs(two))),
        'rhs_1d_linf': float(np.max(np.abs(one))),
    }


def _axis_sources(x: float, nodes: np.ndarray, length: float, radius: float):
    reach = int(math.ceil(radius / length)) + 1
    images = np.arange(-reach, reach + 1) * length
    offsets = x - (nodes[None, :] + images[:, None])
    index = np.broadcast_to(np.arange(nodes.size), offsets.shape)
    keep = np.abs(offsets) < radius
    return offsets[keep], index[keep]


def _velocity_transfers(k: np.ndarray, depth: float, radius: float):
    """
    Cut-off parts of the linear velocity integrals at height depth > 0.

    T3 = exp(-k z) - int_0^A W r^2 J1(k r) / (r^2 + z^2)^(3/2) dr
    T5 = k exp(-k z) / (3 z) - int_0^A W r^2 J1(k r) / (r^2 + z^2)^(5/2) dr
    """
    coarse = _oscillation_edges(0.0, radius, float(k.max()) if k.size else 1.0)
    fine = np.minimum(depth * np.array([0.125, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 8.0]), radius)
    edges = np.unique(np.concatenate([coarse, fine]))

    def body(power):
        def integrand(r):
            weight = radial_window(r / radius) * r * r / (r * r + depth * depth) ** power
            return weight[None, :] * j1(k[:, None] * r[None, :])
        return _panel_integral(integrand, edges)

    decay = np.exp(-k * depth)
    t3 = decay - body(1.5)
    t5 = k * decay / (3.0 * depth) - body(2.5)
    return t3, t5


def velocity_field(f: ScalarField2D, params, points, cfg: Optional[Quadrature2DConfig] = None,
                   refine_factor: int = VELOCITY_REFINEMENT) -> List[VelocitySample]:
    """
    Evaluate the velocity at points off the interface.

    v(x) = -(rho_bar / 4 pi) int (y1, y2, grad f(x' - y) . y) / (|y|^2 + (x3 - f(x' - y))^2)^(3/2) dy

    with x = (x', x3). Sources are the nodes of f refined spectrally by
    refine_factor and their periodic images inside the window disk.

    Raises:
        PreconditionError: If a point lies within one grid spacing of the interface
    """
    cfg = cfg or Quadrature2DConfig()
    _require_2d(f, 'velocity_field')
    grid = f.grid
    cfg.check_grid(grid)
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if not np.all(np.isfinite(pts)):
        raise PreconditionError("velocity query points must be finite")
    spacing = min(grid.spacing1, grid.spacing2)
    heights = interpolate(f, pts[:, :2]) if len(pts) else np.zeros(0)
    for point, height in zip(pts, heights):
        if abs(point[2] - height) <= spacing:
            raise PreconditionError(
                f"point ({point[0]:.6g}, {point[1]:.6g}, {point[2]:.6g}) lies within one "
                f"grid spacing of the interface (f = {height:.6g})"
            )
    if params.rho_bar == 0:
        return [VelocitySample(tuple(map(float, p)), (0.0, 0.0, 0.0)) for p in pts]

    fine = refine(f, refine_factor)
    fine_g1, fine_g2 = gradient(fine)
    radius = cfg.window_radius(grid)
    x1_nodes = np.arange(fine.grid.n1) * fine.grid.spacing1
    x2_nodes = np.arange(fine.grid.n2) * fine.grid.spacing2
    cell = fine.grid.spacing1 * fine.grid.spacing2
    coefficient = -params.rho_bar / (2.0 * TWO_PI)

    mean = grid_mean(f)
    coefficients = transform(f).coefficients.copy()
    coefficients[0, 0] = 0.0
    k1, k2 = grid.wavenumbers()
    k = _abs_wavenumbers(grid)
    unique, inverse = _unique_map(k)

    def evaluate(point):
        x1, x2, x3 = point
        y1, i1 = _axis_sources(x1, x1_nodes, grid.length1, radius)
        y2, i2 = _axis_sources(x2, x2_nodes, grid.length2, radius)
        r2 = y1[:, None] ** 2 + y2[None, :] ** 2
        weights = np.where(r2 < radius * radius,
                           radial_window(np.sqrt(r2) / radius), 0.0) * cell
        heights = fine.samples[i1[:, None], i2[None, :]]
        slope = fine_g1.samples[i1[:, None], i2[None, :]] * y1[:, None] \
            + fine_g2.samples[i1[:, None], i2[None, :]] * y2[None, :]
        dz = x3 - heights
        denominator = r2 + dz * dz
        kernel = weights / (denominator * np.sqrt(denominator))
        velocity = coefficient * np.array([
            np.sum(kernel * y1[:, None]),
            np.sum(kernel * y2[None, :]),
            np.sum(kernel * slope),
        ])

        if cfg.far_field:
            depth = x3 - mean
            if depth != 0.0:
                t3, t5 = _velocity_transfers(unique, abs(depth), radius)
                t3, t5 = t3[inverse], t5[inverse]
                phase = np.exp(1j * k1 * x1) * np.exp(1j * k2 * x2)
                weighted = coefficients * phase
                ratio1 = np.divide(k1, k, out=np.zeros(k.shape), where=k > 0)
                ratio2 = np.divide(k2, k, out=np.zeros(k.shape), where=k > 0)
                lateral = 1.5 * params.rho_bar * 1j * depth * t5 * weighted
                velocity = velocity + np.array([
                    float(np.sum(lateral * ratio1).real),
                    float(np.sum(lateral * ratio2).real),
                    float(np.sum(-0.5 * params.rho_bar * k * t3 * weighted).real),
                ])
        return VelocitySample(tuple(map(float, point)), tuple(map(float, velocity)))

    return parallel_map(evaluate, list(pts))


def velocity_at_extremum(f: ScalarField2D, params, cfg: Optional[Quadrature2DConfig] = None,
                         offset_cells: float = 1.25) -> VelocityProbe:
    """
    Vertical velocity just above the grid argmax, extrapolated to the interface.

    v3 is sampled at heights M + delta and M + 2 delta with
    delta = offset_cells * spacing and linearly extrapolated to delta = 0.
    """
    _require_2d(f, 'velocity_at_extremum')
    flat, _ = locate_extremum(f.samples, 'max')
    i1, i2 = divmod(flat, f.grid.n2)
    x1, x2 = i1 * f.grid.spacing1, i2 * f.grid.spacing2
    peak = float(f.samples[i1, i2])
    delta = offset_cells * min(f.grid.spacing1, f.grid.spacing2)
    samples = velocity_field(
        f, params, [(x1, x2, peak + delta), (x1, x2, peak + 2.0 * delta)], cfg
    )
    limit = 2.0 * samples[0].velocity[2] - samples[1].velocity[2]
    return VelocityProbe((i1, i2), limit, tuple(samples))


def parse_points(text: str) -> List[Tuple[float, float, float]]:
    """
    Parse query points, one "x1 x2 x3" triple per line.

    Blank lines and '#' comments are ignored.

    Raises:
        ConfigParseError: On a malformed line, with its line number
    """
    points = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 3:
            raise ConfigParseError(f"expected 'x1 x2 x3', got {raw.strip()!r}", line=number)
        try:
            point = tuple(float(value) for value in fields)
        except ValueError:
            raise ConfigParseError(f"non-numeric point {raw.strip()!r}", line=number) from None
        if not all(math.isfinite(value) for value in point):
            raise ConfigParseError(f"non-finite point {raw.strip()!r}", line=number)
        points.append(point)
    return points


def format_samples(samples: Iterable[VelocitySample]) -> List[str]:
    """One "x1 x2 x3 v1 v2 v3" line per sample."""
    return [
        ' '.join(f"{value:.17g}" for value in (*sample.position, *sample.velocity))
        for sample in samples
    ]
