"""
Test module for MuskatLab configuration components.

This module contains unit tests for the flat configuration format,
schema validation, scenario presets and run configuration building.
"""

import os
import sys
import math

import jsonschema
import numpy as np
import pytest

# Add src directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.config.config_defaults import (
    DEFAULT_CONFIG, DEFAULT_OUTPUT_DIR, OUTPUT_DIR_ENV, SCENARIO_PRESETS, preset_config
)
from src.config.config_manager import ConfigManager, coerce_value, format_flat, parse_config
from src.config.config_schema import CONFIG_SCHEMA, known_keys, validate_config
from src.config.run_config import bump_profile, parse_modes
from src.core.fields import DomainKind
from src.core.timestepping import AUTO, Scheme
from src.utils.errors import ConfigParseError, ConfigurationError

TEMPLATE_DIR = os.path.join(os.path.dirname(__file__), '..', 'src', 'config', 'templates')


@pytest.mark.unit
class TestConfigSchema:
    """Test the configuration schema validation."""

    def test_default_config_is_valid(self):
        try:
            jsonschema.validate(DEFAULT_CONFIG, CONFIG_SCHEMA)
        except jsonschema.exceptions.ValidationError:
            pytest.fail("Default config failed schema validation")

    @pytest.mark.parametrize('scenario', sorted(SCENARIO_PRESETS))
    def test_presets_are_valid(self, scenario):
        is_valid, error, _ = validate_config(preset_config(scenario))
        assert is_valid, error

    def test_odd_grid_rejected(self):
        config = preset_config('stable_decay_1d')
        config['grid']['n'] = 257
        is_valid, _, key = validate_config(config)
        assert not is_valid
        assert key == 'grid.n'

    def test_known_keys_are_dotted(self):
        keys = known_keys()
        assert 'scenario' in keys and 'grid.n' in keys and 'control.t_end' in keys


@pytest.mark.unit
class TestFlatFormat:
    """Parsing of the key = value format."""

    def test_minimal_config(self):
        run = parse_config("scenario = stable_decay_1d\n")
        assert run.scenario == 'stable_decay_1d'
        assert run.dimension == 1
        assert run.grid.n == 256
        assert run.params.rho_bar == 1.0
        assert run.control.dt == AUTO
        assert run.control.scheme is Scheme.RK4

    def test_comments_and_coercion(self):
        text = ("# stable run\n"
                "scenario = custom   # free form\n"
                "grid.n = 128\n"
                "control.dt = 0.01\n"
                "quadrature.far_field = off\n"
                "checks.expected_rate = none\n")
        manager = ConfigManager(text=text)
        assert manager.get('grid', 'n') == 128
        assert manager.get('control', 'dt') == 0.01
        assert manager.get('quadrature', 'far_field') is False
        assert manager.get('checks', 'expected_rate') is None
        assert manager.line_of('grid.n') == 3

    def test_odd_grid_reports_line(self):
        with pytest.raises(ConfigParseError) as info:
            parse_config("scenario = custom\ngrid.n = 257\n")
        assert info.value.line == 2

    def test_unknown_key_reports_line(self):
        with pytest.raises(ConfigParseError) as info:
            parse_config("scenario = custom\n\ngrd.n = 256\n")
        assert info.value.line == 3
        assert 'grd.n' in str(info.value)

    def test_missing_scenario(self):
        with pytest.raises(ConfigParseError):
            parse_config("grid.n = 64\n")

    def test_unknown_scenario(self):
        with pytest.raises(ConfigParseError) as info:
            parse_config("scenario = nonexistent\n")
        assert info.value.line == 1

    def test_line_without_equals(self):
        with pytest.raises(ConfigParseError) as info:
            parse_config("scenario = custom\ngrid.n 64\n")
        assert info.value.line == 2

    def test_repeated_key(self):
        with pytest.raises(ConfigParseError):
            parse_config("scenario = custom\ngrid.n = 64\ngrid.n = 128\n")

    def test_malformed_value(self):
        with pytest.raises(ConfigParseError):
            coerce_value('grid.n', 'many')

    def test_enum_value(self):
        assert coerce_value('control.scheme', 'integrating_factor') == 'integrating_factor'
        with pytest.raises(ConfigParseError):
            coerce_value('control.scheme', 'euler')


@pytest.mark.unit
class TestConfigManager:
    """Layering of presets, text and overrides."""

    def test_preset_then_text(self):
        manager = ConfigManager(text="scenario = unstable_growth_1d\ncontrol.t_end = 3\n")
        assert manager.get('grid', 'n') == 64
        assert manager.get('control', 't_end') == 3.0
        assert manager.get('params', 'rho1') == 1.0

    def test_overrides_win(self, config_manager):
        config_manager.apply_overrides(['grid.n=128', 'control.t_end = 0.5'])
        assert config_manager.get('grid', 'n') == 128
        assert config_manager.get('control', 't_end') == 0.5

    def test_override_must_have_equals(self, config_manager):
        with pytest.raises(ConfigParseError):
            config_manager.apply_overrides(['grid.n'])

    def test_load_from_file(self, config_path):
        with open(config_path, 'w', encoding='utf-8') as f:
            f.write("scenario = slope_bound_1d\n")
        manager = ConfigManager(config_path)
        assert manager.get('grid', 'n') == 512

    def test_missing_file(self, temp_dir):
        with pytest.raises(ConfigurationError):
            ConfigManager(os.path.join(temp_dir, 'absent.cfg'))

    def test_save_and_reload(self, config_manager, temp_dir):
        path = os.path.join(temp_dir, 'saved', 'run.cfg')
        config_manager.apply_overrides(['grid.n=128'])
        assert config_manager.save(path)
        reloaded = ConfigManager(path)
        assert reloaded.config == config_manager.config

    def test_format_flat_lists_every_key(self):
        text = format_flat(preset_config('stable_decay_1d'))
        assert len(text.splitlines()) == len(known_keys())
        assert 'quadrature.singular_rule = none' in text
        assert 'grid.allow_large = false' in text

    def test_set_reverts_invalid_value(self, config_manager):
        assert config_manager.set('grid', 'n', 128)
        assert not config_manager.set('grid', 'n', 7)
        assert config_manager.get('grid', 'n') == 128
        assert not config_manager.set('nowhere', 'n', 1)

    def test_get_defaults(self, config_manager):
        assert config_manager.get('missing', default=3) == 3
        assert config_manager.get('scenario') == 'stable_decay_1d'
        assert config_manager.get('scenario', 'x', default=4) == 4


@pytest.mark.unit
class TestRunConfig:
    """Typed run configuration and initial data."""

    def test_output_dir_precedence(self, monkeypatch):
        monkeypatch.setenv(OUTPUT_DIR_ENV, '/tmp/from_env')
        text = "scenario = custom\n"
        assert ConfigManager(text=text).to_run_config().output_dir == '/tmp/from_env'
        in_file = ConfigManager(text=text + "output.dir = /tmp/from_file\n")
        assert in_file.to_run_config().output_dir == '/tmp/from_file'
        assert in_file.to_run_config(output_dir='/tmp/cli').output_dir == '/tmp/cli'
        monkeypatch.delenv(OUTPUT_DIR_ENV)
        assert ConfigManager(text=text).to_run_config().output_dir == DEFAULT_OUTPUT_DIR

    def test_mode_list_error_has_line(self):
        with pytest.raises(ConfigParseError) as info:
            parse_config("scenario = custom\ninitial.modes = 1:0.3\n")
        assert info.value.line == 2

    def test_two_d_needs_torus(self):
        text = ("scenario = stable_decay_2d\ngrid.kind = truncated_line\n"
                "grid.length = 50\n")
        with pytest.raises(ConfigurationError):
            parse_config(text)

    def test_rule_must_fit_dimension(self):
        with pytest.raises(ConfigurationError):
            parse_config("scenario = custom\nquadrature.singular_rule = polar_patch\n")

    def test_far_field_flag_reaches_both_quadratures(self):
        run = parse_config("scenario = line_nonneg_decay_1d\nquadrature.far_field = off\n")
        assert run.quadrature_1d.far_field is False
        assert run.quadrature_2d.far_field is False
        assert parse_config("scenario = line_nonneg_decay_1d\n").quadrature_1d.far_field is True

    def test_parse_modes(self):
        modes = parse_modes("1:0.3:0; 3:0.1:1.5", 1)
        assert modes == [((1.0,), 0.3, 0.0), ((3.0,), 0.1, 1.5)]
        assert parse_modes("1,-1:0.1:0", 2) == [((1.0, -1.0), 0.1, 0.0)]
        with pytest.raises(ConfigurationError):
            parse_modes("1:0.1:0", 2)
        with pytest.raises(ConfigurationError):
            parse_modes("1:x:0", 1)

    def test_mode_initial_field(self):
        run = parse_config("scenario = custom\ngrid.n = 64\ninitial.modes = 1:0.3:0;2:0.1:0\n")
        f = run.initial_field()
        x = run.grid.nodes()
        np.testing.assert_allclose(f.samples, 0.3 * np.cos(x) + 0.1 * np.cos(2 * x), atol=1e-15)

    def test_sine_preset(self):
        run = parse_config("scenario = slope_bound_1d\n")
        f = run.initial_field()
        np.testing.assert_allclose(f.samples, 0.9 * np.sin(run.grid.nodes()), atol=1e-12)

    def test_line_bump(self):
        run = parse_config("scenario = line_nonneg_decay_1d\n")
        assert run.grid.kind is DomainKind.TRUNCATED_LINE
        f = run.initial_field()
        assert f.samples.max() == pytest.approx(0.5)
        assert f.samples.min() == 0.0
        assert f.samples[run.grid.n // 2] == pytest.approx(0.5)

    def test_two_d_modes(self):
        run = parse_config("scenario = periodic_meanzero_decay_2d\ngrid.n = 16\n")
        f = run.initial_field()
        assert f.samples.shape == (16, 16)
        assert f.samples[0, 0] == pytest.approx(0.1)

    def test_file_initial_data(self, temp_dir):
        path = os.path.join(temp_dir, 'f0.txt')
        np.savetxt(path, 0.2 * np.cos(np.arange(64) * 2 * math.pi / 64))
        run = parse_config(f"scenario = custom\ngrid.n = 64\ninitial.kind = file\n"
                           f"initial.path = {path}\n")
        assert run.initial_field().samples[0] == pytest.approx(0.2)

    def test_missing_initial_file(self, temp_dir):
        path = os.path.join(temp_dir, 'absent.txt')
        with pytest.raises(ConfigurationError):
            parse_config(f"scenario = custom\ninitial.kind = file\ninitial.path = {path}\n")

    @pytest.mark.parametrize('name', sorted(
        name for name in os.listdir(TEMPLATE_DIR) if name.endswith('.cfg')))
    def test_templates_load(self, name):
        manager = ConfigManager(os.path.join(TEMPLATE_DIR, name))
        assert manager.to_run_config().scenario == name[:-len('.cfg')]

    def test_template_points(self):
        from src.core.muskat2d import parse_points
        with open(os.path.join(TEMPLATE_DIR, 'probe_points.txt'), encoding='utf-8') as f:
            assert len(parse_points(f.read())) == 3

    def test_bump_profile(self):
        np.testing.assert_allclose(bump_profile([0.0, 1.0, 2.0]), [1.0, 0.0, 0.0])
        assert 0.0 < bump_profile(0.5) < 1.0
