"""
Default configuration settings for MuskatLab.

This module provides the nested defaults every run starts from and the
scenario presets layered on top of them. A preset only lists the values it
changes; user keys are applied after the preset.
"""

import os
import copy
import math
import pathlib

# User's home directory for default paths
USER_HOME = str(pathlib.Path.home())

DEFAULT_OUTPUT_DIR = os.path.join('.', 'muskat_lab_out')
OUTPUT_DIR_ENV = 'MUSKAT_LAB_OUT'

# Default log directory
DEFAULT_LOG_DIR = os.path.join(USER_HOME, '.muskat_lab', 'logs')

# Default configuration
DEFAULT_CONFIG = {
    "scenario": "custom",
    "dimension": 1,
    "grid": {
        "n": 256,
        "n2": None,
        "length": 2.0 * math.pi,
        "length2": None,
        "kind": "periodic_torus",
        "allow_large": False
    },
    "params": {
        "rho1": 0.0,
        "rho2": 1.0
    },
    "initial": {
        "kind": "modes",
        "modes": "1:0.3:0",
        "bump_center": None,
        "bump_width": 1.0,
        "bump_height": 0.5,
        "path": None
    },
    "control": {
        "dt": "auto",
        "cfl_safety": 0.5,
        "t_end": 5.0,
        "max_steps": 100000,
        "blowup_slope": 10.0,
        "scheme": "rk4"
    },
    "quadrature": {
        "node_offset": "collocated",
        "singular_rule": None,
        "line_truncation_radius": None,
        "image_layers": 1,
        "polar_patch_rings": 8,
        "far_field": True
    },
    "checks": {
        "step_tolerance": 1e-9,
        "bound_slack": 0.01,
        "expected_rate": None
    },
    "output": {
        "dir": None,
        "stride": 1
    },
    "runtime": {
        "threads": 1
    },
    "logs": {
        "dir": None,
        "level": "INFO",
        "max_size_mb": 10,
        "rotation_count": 5,
        "include_timestamps": True,
        "json_format": False
    }
}

SIN_PHASE = -0.5 * math.pi

# Scenario presets: section -> key -> value
SCENARIO_PRESETS = {
    "custom": {},
    "stable_decay_1d": {
        "initial": {"modes": "1:0.3:0"},
        "control": {"t_end": 5.0},
    },
    "periodic_meanzero_decay_1d": {
        "initial": {"modes": "1:0.1:0"},
        "control": {"t_end": 5.0},
        "checks": {"bound_slack": 0.01, "expected_rate": 0.45},
    },
    "line_nonneg_decay_1d": {
        "grid": {"n": 4096, "length": 80.0 * math.pi, "kind": "truncated_line"},
        "initial": {"kind": "bump", "bump_width": 4.0, "bump_height": 0.5},
        "control": {"t_end": 10.0},
        "checks": {"bound_slack": 0.05, "step_tolerance": 1e-9},
    },
    "slope_bound_1d": {
        "grid": {"n": 512},
        "initial": {"modes": f"1:0.9:{SIN_PHASE!r}"},
        "control": {"t_end": 5.0},
        "checks": {"step_tolerance": 1e-6},
    },
    "unstable_growth_1d": {
        "grid": {"n": 64},
        "params": {"rho1": 1.0, "rho2": 0.0},
        "initial": {"modes": "1:0.001:0"},
        "control": {"t_end": 20.0},
        "checks": {"bound_slack": 0.05, "expected_rate": 0.5},
    },
    "stable_decay_2d": {
        "dimension": 2,
        "grid": {"n": 64},
        "initial": {"modes": "1,1:0.1:0;1,-1:0.1:0"},
        "control": {"t_end": 1.0},
        "quadrature": {"singular_rule": "polar_patch"},
        "checks": {"step_tolerance": 1e-6},
    },
    "periodic_meanzero_decay_2d": {
        "dimension": 2,
        "grid": {"n": 64},
        "initial": {"modes": "1,0:0.1:0"},
        "control": {"t_end": 1.0},
        "quadrature": {"singular_rule": "polar_patch"},
        "checks": {"step_tolerance": 1e-6, "bound_slack": 0.05},
    },
    "line_nonneg_decay_2d": {
        "dimension": 2,
        "grid": {"n": 96, "length": 16.0 * math.pi},
        "initial": {"kind": "bump", "bump_width": 6.0, "bump_height": 0.5},
        "control": {"t_end": 2.0},
        "quadrature": {"singular_rule": "polar_patch"},
        "checks": {"step_tolerance": 1e-6, "bound_slack": 0.1},
    },
    "reduction_check": {
        "grid": {"n": 64},
        "initial": {"modes": "1:0.2:0"},
        "control": {"t_end": 0.0},
        "quadrature": {"image_layers": 2, "polar_patch_rings": 8},
        "checks": {"bound_slack": 0.01},
    },
    "velocity_probe": {
        "dimension": 2,
        "grid": {"n": 64},
        "initial": {"modes": "1,0:0.1:0"},
        "control": {"t_end": 0.0},
        "quadrature": {"singular_rule": "polar_patch"},
        "checks": {"bound_slack": 0.05},
    },
}


def _merge(target, overlay):
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(target.get(key), dict):
            _merge(target[key], value)
        else:
            target[key] = value
    return target


def preset_config(scenario: str) -> dict:
    """Deep copy of the defaults with the named preset applied."""
    config = copy.deepcopy(DEFAULT_CONFIG)
    _merge(config, copy.deepcopy(SCENARIO_PRESETS.get(scenario, {})))
    config["scenario"] = scenario
    return config
