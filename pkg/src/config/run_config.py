"""
Typed run configuration.

RunConfig is built from a validated nested configuration dictionary and
turns it into the grid, densities, quadrature settings, step control and
initial field of one run.
"""

import os
import math
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from .config_defaults import DEFAULT_OUTPUT_DIR, OUTPUT_DIR_ENV
from .config_schema import validate_path_exists
from ..core.fields import (
    DomainKind, GridSpec1D, GridSpec2D, PhysParams, ScalarField, make_field, make_grid,
    make_grid_2d
)
from ..core.muskat1d import NodeOffset, Quadrature1DConfig, SingularRule1D
from ..core.muskat2d import Quadrature2DConfig, SingularRule2D
from ..core.timestepping import AUTO, Scheme, StepControl
from ..utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

Mode = Tuple[Tuple[float, ...], float, float]


def parse_modes(text: str, dimension: int) -> List[Mode]:
    """
    Parse a mode list "k:amp:phase;..." (2-D: "k1,k2:amp:phase").

    Each entry contributes amp * cos(k . x + phase).

    Raises:
        ConfigurationError: On a malformed entry
    """
    modes = []
    for entry in (part.strip() for part in text.split(';')):
        if not entry:
            continue
        fields = entry.split(':')
        if len(fields) != 3:
            raise ConfigurationError(f"mode entry {entry!r} is not 'k:amp:phase'")
        try:
            wavenumber = tuple(float(k) for k in fields[0].split(','))
            amplitude = float(fields[1])
            phase = float(fields[2])
        except ValueError:
            raise ConfigurationError(f"mode entry {entry!r} has a non-numeric field") from None
        if len(wavenumber) != dimension:
            raise ConfigurationError(
                f"mode entry {entry!r} needs {dimension} wavenumber component(s)"
            )
        if not all(math.isfinite(v) for v in (*wavenumber, amplitude, phase)):
            raise ConfigurationError(f"mode entry {entry!r} is not finite")
        modes.append((wavenumber, amplitude, phase))
    return modes


def bump_profile(r):
    """C-infinity bump equal to 1 at r = 0 and vanishing for r >= 1."""
    r = np.asarray(r, dtype=float)
    inside = r < 1.0
    safe = np.where(inside, r, 0.0)
    return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - safe * safe)), 0.0)


@dataclass
class RunConfig:
    """Everything one scenario run needs, with defaults filled in."""

    scenario: str
    dimension: int
    grid: Union[GridSpec1D, GridSpec2D]
    params: PhysParams
    initial: dict
    control: StepControl
    quadrature_1d: Quadrature1DConfig
    quadrature_2d: Quadrature2DConfig
    checks: dict
    output_dir: str
    stride: int
    threads: int
    settings: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, config: dict, output_dir: Optional[str] = None) -> 'RunConfig':
        """
        Build a RunConfig from a validated nested configuration.

        Args:
            config: Nested configuration, already schema-valid
            output_dir: Explicit output directory taking precedence over all others

        Raises:
            ConfigurationError: On inconsistent settings
        """
        dimension = config['dimension']
        grid_cfg = config['grid']
        quad = config['quadrature']
        kind = DomainKind(grid_cfg['kind'])

        if dimension == 2:
            if kind is not DomainKind.PERIODIC_TORUS:
                raise ConfigurationError("2-D runs need grid.kind = periodic_torus")
            grid = make_grid_2d(grid_cfg['n'], grid_cfg['n2'], grid_cfg['length'],
                                grid_cfg['length2'])
        else:
            grid = make_grid(grid_cfg['n'], grid_cfg['length'], kind)

        rule = quad['singular_rule']
        rule_1d, rule_2d = SingularRule1D.ANALYTIC_LIMIT, SingularRule2D.PUNCTURE_CELL
        if rule is not None:
            names_1d = {r.value for r in SingularRule1D}
            if dimension == 1 and rule not in names_1d:
                raise ConfigurationError(f"singular rule {rule!r} does not apply to 1-D runs")
            if dimension == 2 and rule in names_1d:
                raise ConfigurationError(f"singular rule {rule!r} does not apply to 2-D runs")
            if rule in names_1d:
                rule_1d = SingularRule1D(rule)
            else:
                rule_2d = SingularRule2D(rule)

        quadrature_1d = Quadrature1DConfig(NodeOffset(quad['node_offset']), rule_1d,
                                           quad['line_truncation_radius'], quad['far_field'])
        quadrature_2d = Quadrature2DConfig(
            image_layers=quad['image_layers'],
            singular_rule=rule_2d,
            polar_patch_rings=quad['polar_patch_rings'],
            far_field=quad['far_field'],
            allow_large_grid=grid_cfg['allow_large'],
        )
        if dimension == 2:
            quadrature_2d.check_grid(grid)
        elif not grid.is_periodic:
            quadrature_1d.truncation_radius(grid)

        control_cfg = config['control']
        control = StepControl(
            t_end=float(control_cfg['t_end']),
            dt=AUTO if control_cfg['dt'] == AUTO else float(control_cfg['dt']),
            cfl_safety=float(control_cfg['cfl_safety']),
            max_steps=int(control_cfg['max_steps']),
            blowup_slope=float(control_cfg['blowup_slope']),
            scheme=Scheme(control_cfg['scheme']),
        )

        initial = dict(config['initial'])
        if initial['kind'] == 'modes':
            initial['parsed_modes'] = parse_modes(initial['modes'], dimension)
        elif initial['kind'] == 'file':
            is_valid, error = validate_path_exists(initial['path'], is_file=True)
            if not is_valid:
                raise ConfigurationError(f"initial.path: {error}")

        resolved_dir = (output_dir or config['output']['dir'] or os.environ.get(OUTPUT_DIR_ENV)
                        or DEFAULT_OUTPUT_DIR)
        return cls(
            scenario=config['scenario'],
            dimension=dimension,
            grid=grid,
            params=PhysParams(float(config['params']['rho1']), float(config['params']['rho2'])),
            initial=initial,
            control=control,
            quadrature_1d=quadrature_1d,
            quadrature_2d=quadrature_2d,
            checks=dict(config['checks']),
            output_dir=resolved_dir,
            stride=config['output']['stride'],
            threads=config['runtime']['threads'],
            settings=config,
        )

    def initial_field(self) -> ScalarField:
        """Sample the configured initial interface on the grid."""
        kind = self.initial['kind']
        grid = self.grid
        if kind == 'file':
            samples = np.loadtxt(self.initial['path'], dtype=float, ndmin=2 if self.dimension == 2 else 1)
            return make_field(grid, samples)

        if self.dimension == 2:
            x1, x2 = grid.nodes()
            if kind == 'modes':
                total = np.zeros(grid.shape)
                for (k1, k2), amplitude, phase in self.initial['parsed_modes']:
                    total = total + amplitude * np.cos(k1 * x1 + k2 * x2 + phase)
                return make_field(grid, total)
            centre = self.initial['bump_center']
            c1 = 0.5 * grid.length1 if centre is None else centre
            c2 = 0.5 * grid.length2 if centre is None else centre
            width = self.initial['bump_width']
            r = np.hypot((x1 - c1) / width, (x2 - c2) / width)
            return make_field(grid, self.initial['bump_height'] * bump_profile(r))

        x = grid.nodes()
        if kind == 'modes':
            total = np.zeros(grid.shape)
            for (k,), amplitude, phase in self.initial['parsed_modes']:
                total = total + amplitude * np.cos(k * x + phase)
            return make_field(grid, total)
        centre = self.initial['bump_center']
        if centre is None:
            centre = 0.0 if not grid.is_periodic else 0.5 * grid.length
        r = np.abs(x - centre) / self.initial['bump_width']
        return make_field(grid, self.initial['bump_height'] * bump_profile(r))
