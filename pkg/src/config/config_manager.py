"""
Configuration manager for MuskatLab.

This module provides the ConfigManager class which parses the flat
"key = value" run configuration format, layers scenario presets and
command line overrides, validates the result and hands out RunConfig
objects.
"""

import os
import copy
import logging
from typing import Iterable, Optional

from .config_defaults import DEFAULT_CONFIG, SCENARIO_PRESETS, preset_config
from .config_schema import key_schema, known_keys, validate_config
from .run_config import RunConfig
from ..utils.errors import ConfigParseError, ConfigurationError

# Set up logging
logger = logging.getLogger(__name__)

_TRUE = {'true', 'yes', 'on', '1'}
_FALSE = {'false', 'no', 'off', '0'}
_NULL = {'none', 'null', ''}


def _schema_types(schema):
    if 'anyOf' in schema:
        types = []
        for option in schema['anyOf']:
            types.extend(_schema_types(option))
        return types
    declared = schema.get('type', 'string')
    return declared if isinstance(declared, list) else [declared]


def coerce_value(key: str, text: str, line: Optional[int] = None):
    """
    Convert the text of a flat entry to the type its schema declares.

    Raises:
        ConfigParseError: On an unknown key or a value of the wrong type
    """
    schema = key_schema(key)
    if schema is None:
        raise ConfigParseError(f"unknown key {key!r}", line=line)
    value = text.strip()
    if len(value) >= 2 and value[0] == value[-1] and value[0] in '"\'':
        value = value[1:-1]
    types = _schema_types(schema)
    lowered = value.lower()
    if 'null' in types and lowered in _NULL:
        return None
    for kind in types:
        if kind == 'boolean':
            if lowered in _TRUE:
                return True
            if lowered in _FALSE:
                return False
        elif kind == 'integer':
            try:
                return int(value)
            except ValueError:
                continue
        elif kind == 'number':
            try:
                return float(value)
            except ValueError:
                continue
        elif kind == 'string':
            if 'enum' in schema or 'anyOf' in schema:
                allowed = schema.get('enum') or [
                    v for option in schema.get('anyOf', []) for v in option.get('enum', [])
                ]
                if value in allowed:
                    return value
                continue
            return value
    raise ConfigParseError(f"malformed value {text.strip()!r} for {key}", line=line)


def parse_flat(text: str):
    """
    Split flat configuration text into (key, raw value, line number) entries.

    One "key = value" pair per line; '#' starts a comment.

    Raises:
        ConfigParseError: On a line without '=', an unknown or repeated key
    """
    entries = []
    seen = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigParseError(f"expected 'key = value', got {line!r}", line=number)
        key, value = (part.strip() for part in line.split('=', 1))
        if key_schema(key) is None:
            raise ConfigParseError(f"unknown key {key!r}", line=number)
        if key in seen:
            raise ConfigParseError(f"key {key!r} repeats line {seen[key]}", line=number)
        seen[key] = number
        entries.append((key, value, number))
    return entries


def _assign(config: dict, key: str, value):
    if '.' in key:
        section, name = key.split('.', 1)
        config[section][name] = value
    else:
        config[key] = value


def format_flat(config: dict) -> str:
    """Render a nested configuration in the flat format, one key per line."""
    lines = []
    for key in known_keys():
        if '.' in key:
            section, name = key.split('.', 1)
            value = config[section][name]
        else:
            value = config[key]
        if value is None:
            text = 'none'
        elif isinstance(value, bool):
            text = 'true' if value else 'false'
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f"{key} = {text}")
    return '\n'.join(lines) + '\n'


class ConfigManager:
    """
    Manages the configuration of one run.

    Values are resolved in order: defaults, the scenario preset, the keys of
    the configuration text, then command line overrides.
    """

    def __init__(self, config_path=None, text=None, overrides: Iterable[str] = ()):
        """
        Initialize the configuration manager.

        Args:
            config_path (str, optional): Path to a flat configuration file.
            text (str, optional): Configuration text, used when no path is given.
            overrides (iterable of str): "key=value" pairs applied last.
        """
        self.config_path = config_path
        self.config = copy.deepcopy(DEFAULT_CONFIG)
        # dotted key -> source line, for error reporting
        self._lines = {}
        self._entries = []

        if config_path is not None:
            self.load()
        elif text is not None:
            self._apply_text(text)
        if overrides:
            self.apply_overrides(overrides)

    def load(self):
        """
        Load configuration from file.

        Raises:
            ConfigurationError: If the file cannot be read
            ConfigParseError: If the file is malformed
        """
        try:
            with open(self.config_path, 'r', encoding='utf-8') as f:
                text = f.read()
        except IOError as e:
            raise ConfigurationError(f"cannot read configuration {self.config_path}: {e}") from e
        self._apply_text(text)
        logger.info(f"Configuration loaded from {self.config_path}")
        return True

    def _apply_text(self, text: str):
        entries = []
        for key, raw, number in parse_flat(text):
            entries.append((key, coerce_value(key, raw, number), number))
        self._entries = entries
        self._rebuild()

    def _rebuild(self):
        scenario = next((value for key, value, _ in self._entries if key == 'scenario'), None)
        if scenario is None:
            raise ConfigParseError("missing required key 'scenario'")
        if scenario not in SCENARIO_PRESETS:
            line = next(number for key, _, number in self._entries if key == 'scenario')
            raise ConfigParseError(f"unknown scenario {scenario!r}", line=line)
        config = preset_config(scenario)
        self._lines = {}
        for key, value, number in self._entries:
            _assign(config, key, value)
            self._lines[key] = number
        is_valid, error, key = validate_config(config)
        if not is_valid:
            raise ConfigParseError(f"{key or 'configuration'}: {error}", line=self._lines.get(key))
        self.config = config

    def apply_overrides(self, overrides: Iterable[str]):
        """
        Apply "key=value" overrides on top of the loaded configuration.

        Raises:
            ConfigParseError: On a malformed override or unknown key
        """
        entries = [(key, value, number) for key, value, number in self._entries]
        for pair in overrides:
            if '=' not in pair:
                raise ConfigParseError(f"override {pair!r} is not 'key=value'")
            key, raw = (part.strip() for part in pair.split('=', 1))
            value = coerce_value(key, raw)
            entries = [entry for entry in entries if entry[0] != key]
            entries.append((key, value, None))
            logger.debug(f"Override {key} = {value!r}")
        self._entries = entries
        self._rebuild()

    def save(self, path=None):
        """
        Save configuration in the flat format.

        Returns:
            bool: True if configuration was saved successfully, False otherwise.
        """
        path = path or self.config_path
        is_valid, error, _ = validate_config(self.config)
        if not is_valid:
            logger.error(f"Cannot save invalid configuration: {error}")
            return False
        directory = os.path.dirname(path)
        try:
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(path, 'w', encoding='utf-8') as f:
                f.write(format_flat(self.config))
            logger.info(f"Configuration saved to {path}")
            return True
        except IOError as e:
            logger.error(f"Error saving configuration: {str(e)}")
            return False

    def get(self, section, key=None, default=None):
        """
        Get a configuration value.

        Args:
            section (str): Configuration section, or a top-level key.
            key (str, optional): Key within the section. If not provided,
                returns the entire section.
            default (any, optional): Default value to return if the key doesn't exist.

        Returns:
            any: Configuration value, or default if not found.
        """
        if section not in self.config:
            return default

        if key is None:
            return self.config[section]

        value = self.config[section]
        if not isinstance(value, dict):
            return default
        return value.get(key, default)

    def set(self, section, key, value):
        """
        Set a configuration value.

        Args:
            section (str): Configuration section.
            key (str): Key within the section.
            value (any): Value to set.

        Returns:
            bool: True if value was set successfully, False otherwise.
        """
        if section not in self.config or not isinstance(self.config[section], dict):
            logger.error(f"Unknown configuration section: {section}")
            return False
        missing = object()
        previous = self.config[section].get(key, missing)
        self.config[section][key] = value

        is_valid, error, _ = validate_config(self.config)
        if not is_valid:
            logger.error(f"Invalid configuration after setting {section}.{key}: {error}")
            # Revert the change
            if previous is missing:
                del self.config[section][key]
            else:
                self.config[section][key] = previous
            return False

        return True

    def line_of(self, key: str) -> Optional[int]:
        """Source line of a dotted key, if it came from the configuration text."""
        return self._lines.get(key)

    def to_run_config(self, output_dir: Optional[str] = None) -> RunConfig:
        """
        Build the typed run configuration.

        Raises:
            ConfigParseError: If a value is inconsistent, with the line of the
                initial mode list when that is the culprit
            ConfigurationError: On other inconsistent settings
        """
        try:
            return RunConfig.from_dict(self.config, output_dir=output_dir)
        except ConfigurationError as e:
            if isinstance(e, ConfigParseError):
                raise
            if str(e).startswith('mode entry'):
                raise ConfigParseError(str(e), line=self.line_of('initial.modes')) from e
            raise


def parse_config(text: str, overrides: Iterable[str] = ()) -> RunConfig:
    """
    Parse flat configuration text into a validated RunConfig.

    Raises:
        ConfigParseError: On unknown keys, malformed values or a missing scenario
    """
    return ConfigManager(text=text, overrides=overrides).to_run_config()
