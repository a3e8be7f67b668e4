"""
Configuration package for MuskatLab.

This package handles all configuration-related functionality
including parsing, validating and resolving run configurations.
"""

from .config_manager import ConfigManager, parse_config
from .config_defaults import DEFAULT_CONFIG, SCENARIO_PRESETS
from .run_config import RunConfig

__all__ = ['ConfigManager', 'parse_config', 'DEFAULT_CONFIG', 'SCENARIO_PRESETS', 'RunConfig']
