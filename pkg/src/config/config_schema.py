"""
Configuration schema for MuskatLab.

This module defines the schema used to validate run configurations and the
helpers that map flat dotted keys onto it.
"""

import os
import jsonschema

from .config_defaults import SCENARIO_PRESETS

_EVEN_COUNT = {"type": "integer", "minimum": 8, "multipleOf": 2}
_NULLABLE_EVEN_COUNT = {"type": ["integer", "null"], "minimum": 8, "multipleOf": 2}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_NULLABLE_POSITIVE = {"type": ["number", "null"], "exclusiveMinimum": 0}

# Configuration schema definition using JSON Schema format
CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "scenario": {"type": "string", "enum": sorted(SCENARIO_PRESETS)},
        "dimension": {"type": "integer", "enum": [1, 2]},
        "grid": {
            "type": "object",
            "properties": {
                "n": _EVEN_COUNT,
                "n2": _NULLABLE_EVEN_COUNT,
                "length": _POSITIVE,
                "length2": _NULLABLE_POSITIVE,
                "kind": {"type": "string", "enum": ["periodic_torus", "truncated_line"]},
                "allow_large": {"type": "boolean"}
            },
            "required": ["n", "n2", "length", "length2", "kind", "allow_large"],
            "additionalProperties": False
        },
        "params": {
            "type": "object",
            "properties": {
                "rho1": {"type": "number", "minimum": 0},
                "rho2": {"type": "number", "minimum": 0}
            },
            "required": ["rho1", "rho2"],
            "additionalProperties": False
        },
        "initial": {
            "type": "object",
            "properties": {
                "kind": {"type": "string", "enum": ["modes", "bump", "file"]},
                "modes": {"type": "string"},
                "bump_center": {"type": ["number", "null"]},
                "bump_width": _POSITIVE,
                "bump_height": {"type": "number"},
                "path": {"type": ["string", "null"]}
            },
            "required": ["kind", "modes", "bump_center", "bump_width", "bump_height", "path"],
            "additionalProperties": False
        },
        "control": {
            "type": "object",
            "properties": {
                "dt": {"anyOf": [_POSITIVE, {"type": "string", "enum": ["auto"]}]},
                "cfl_safety": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "t_end": {"type": "number", "minimum": 0},
                "max_steps": {"type": "integer", "minimum": 1},
                "blowup_slope": _POSITIVE,
                "scheme": {"type": "string", "enum": ["rk4", "integrating_factor"]}
            },
            "required": ["dt", "cfl_safety", "t_end", "max_steps", "blowup_slope", "scheme"],
            "additionalProperties": False
        },
        "quadrature": {
            "type": "object",
            "properties": {
                "node_offset": {"type": "string", "enum": ["collocated", "half_shifted"]},
                "singular_rule": {
                    "type": ["string", "null"],
                    "enum": ["analytic_limit", "skip_node", "puncture_cell", "polar_patch", None]
                },
                "line_truncation_radius": _NULLABLE_POSITIVE,
                "image_layers": {"type": "integer", "minimum": 0, "maximum": 4},
                "polar_patch_rings": {"type": "integer", "minimum": 4},
                "far_field": {"type": "boolean"}
            },
            "required": ["node_offset", "singular_rule", "line_truncation_radius",
                         "image_layers", "polar_patch_rings", "far_field"],
            "additionalProperties": False
        },
        "checks": {
            "type": "object",
            "properties": {
                "step_tolerance": {"type": "number", "minimum": 0},
                "bound_slack": {"type": "number", "minimum": 0},
                "expected_rate": {"type": ["number", "null"]}
            },
            "required": ["step_tolerance", "bound_slack", "expected_rate"],
            "additionalProperties": False
        },
        "output": {
            "type": "object",
            "properties": {
                "dir": {"type": ["string", "null"]},
                "stride": {"type": "integer", "minimum": 1}
            },
            "required": ["dir", "stride"],
            "additionalProperties": False
        },
        "runtime": {
            "type": "object",
            "properties": {
                "threads": {"type": "integer", "minimum": 0}
            },
            "required": ["threads"],
            "additionalProperties": False
        },
        "logs": {
            "type": "object",
            "properties": {
                "dir": {"type": ["string", "null"]},
                "level": {"type": "string", "enum": ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]},
                "max_size_mb": {"type": "number", "minimum": 1, "maximum": 100},
                "rotation_count": {"type": "number", "minimum": 1, "maximum": 20},
                "include_timestamps": {"type": "boolean"},
                "json_format": {"type": "boolean"}
            },
            "required": ["dir", "level", "max_size_mb", "rotation_count", "include_timestamps",
                         "json_format"],
            "additionalProperties": False
        }
    },
    "required": ["scenario", "dimension", "grid", "params", "initial", "control", "quadrature",
                 "checks", "output", "runtime", "logs"],
    "additionalProperties": False
}


def validate_config(config):
    """
    Validate configuration against the schema.

    Args:
        config (dict): Configuration dictionary to validate

    Returns:
        tuple: (is_valid, error_message, dotted_key or None)
    """
    try:
        jsonschema.validate(instance=config, schema=CONFIG_SCHEMA)
        return True, None, None
    except jsonschema.exceptions.ValidationError as e:
        path = [str(part) for part in e.absolute_path]
        return False, e.message, '.'.join(path) if path else None


def key_schema(dotted_key):
    """
    Schema fragment for a flat dotted key, or None if the key is unknown.

    Args:
        dotted_key (str): e.g. 'grid.n' or 'scenario'
    """
    parts = dotted_key.split('.')
    if len(parts) > 2:
        return None
    node = CONFIG_SCHEMA
    for part in parts:
        properties = node.get("properties", {})
        if part not in properties:
            return None
        node = properties[part]
    if node.get("type") == "object":
        return None
    return node


def known_keys():
    """Every flat dotted key accepted in a configuration file, in schema order."""
    keys = []
    for section, node in CONFIG_SCHEMA["properties"].items():
        if node.get("type") == "object":
            keys.extend(f"{section}.{key}" for key in node["properties"])
        else:
            keys.append(section)
    return keys


def validate_path_exists(path, is_file=True):
    """
    Validate that a path exists and is the correct type.

    Args:
        path (str): Path to validate
        is_file (bool): Whether path should be a file (True) or directory (False)

    Returns:
        tuple: (is_valid, error_message)
    """
    if not path or not os.path.exists(path):
        return False, f"Path does not exist: {path}"

    if is_file and not os.path.isfile(path):
        return False, f"Path is not a file: {path}"
    elif not is_file and not os.path.isdir(path):
        return False, f"Path is not a directory: {path}"

    return True, None
