"""
Configuration and fixtures for pytest.

This module provides fixtures for the grids, fields and configurations
shared by the MuskatLab tests.
"""

import os
import sys
import math
import shutil
import tempfile

import numpy as np
import pytest

# Add src directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.config import ConfigManager
from src.core.fields import PhysParams, field_from_function, make_grid, make_grid_2d, make_field
from src.utils.parallel import set_thread_count


@pytest.fixture(autouse=True)
def single_thread():
    """Run every test with one quadrature worker."""
    set_thread_count(1)
    yield
    set_thread_count(1)


@pytest.fixture
def temp_dir():
    """Create a temporary directory for testing."""
    temp_dir = tempfile.mkdtemp()
    yield temp_dir
    # Clean up
    shutil.rmtree(temp_dir)


@pytest.fixture
def config_path(temp_dir):
    """Create a temporary config path for testing."""
    return os.path.join(temp_dir, 'run.cfg')


@pytest.fixture
def config_manager():
    """Create a ConfigManager for the stable 1-D preset."""
    return ConfigManager(text="scenario = stable_decay_1d\n")


@pytest.fixture
def stable():
    """Unit density jump, heavier fluid below."""
    return PhysParams.from_jump(1.0)


@pytest.fixture
def unstable():
    return PhysParams.from_jump(-1.0)


@pytest.fixture
def grid64():
    return make_grid(64)


@pytest.fixture
def cosine_field(grid64):
    """0.3 cos x on 64 periodic nodes."""
    return field_from_function(grid64, lambda x: 0.3 * np.cos(x))


@pytest.fixture
def line_grid():
    """Truncated line of half width 20 pi."""
    return make_grid(1024, 40.0 * math.pi, 'truncated_line')


@pytest.fixture
def grid2d():
    return make_grid_2d(32)


@pytest.fixture
def surface(grid2d):
    """0.1 cos x1 cos x2 on a 32 x 32 torus."""
    x1, x2 = grid2d.nodes()
    return make_field(grid2d, 0.1 * np.cos(x1) * np.cos(x2))
