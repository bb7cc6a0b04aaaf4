"""
Pytest configuration and shared fixtures for bellga tests
"""

from configparser import ConfigParser
from unittest.mock import patch

import numpy as np
import pytest

from bellga.algebra import Direction
from bellga.chsh import optimal_planar_settings
from bellga.common import CONFIG_OPTIONS


@pytest.fixture
def temp_config_dir(tmp_path):
    """Create a temporary config directory for testing"""
    config_dir = tmp_path / ".config" / "bellga"
    config_dir.mkdir(parents=True)
    return config_dir


@pytest.fixture
def temp_config_file(temp_config_dir):
    """Create a temporary config file with a [run] section"""
    config_file = temp_config_dir / "config"
    parser = ConfigParser()

    parser.add_section('run')
    parser.set('run', 'model', 'bivector')
    parser.set('run', 'samples', '5000')
    parser.set('run', 'seed', '11')

    with open(config_file, 'w') as f:
        parser.write(f)

    return config_file


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Keep every test away from the real config file and BELLGA_* variables"""
    for option in CONFIG_OPTIONS:
        monkeypatch.delenv(f"BELLGA_{option.upper()}", raising=False)

    config_file = tmp_path / "isolated" / "config"
    with patch('bellga.common.CONFIG_FILE', config_file), \
         patch('bellga.config_cmd.CONFIG_FILE', config_file):
        yield config_file


@pytest.fixture
def mock_config(temp_config_file):
    """Point the config loader and config commands at the populated temp file"""
    with patch('bellga.common.CONFIG_FILE', temp_config_file), \
         patch('bellga.config_cmd.CONFIG_FILE', temp_config_file):
        yield temp_config_file


@pytest.fixture
def rng():
    """Seeded numpy Generator"""
    return np.random.default_rng(12345)


@pytest.fixture
def optimal_settings():
    """a = 0, a' = 90, b = 45, b' = 135 degrees in the e1-e2 plane"""
    return optimal_planar_settings()


@pytest.fixture
def sixty_degrees():
    """Pair of in-plane directions 60 degrees apart"""
    return Direction.from_angle(0.0), Direction.from_angle(60.0)
