"""
Pytest configuration and fixtures for zeno-scissors testing.

This module provides:
- Cascade geometry fixtures
- Probe state fixtures (Fock, coherent, phase-squeezed)
- Configuration cache isolation
- Temporary configuration and coefficient files
"""

import math

import pytest
import yaml

from src.core.models.data_models.mode_space import ModeSpace
from src.core.models.data_models.probe_state import ProbeStateSpec
from src.core.models.data_models.stage_params import StageParams
from src.core.services.calculation_services.probe_states import ProbeStateFactory
from src.core.services.calculation_services.staged_evolution import StagedEvolutionEngine
from src.core.services.data_services import config_service

# Phase-squeezed preset with unit mean photon number and Mandel Q of about 1.67
SQUEEZED_PRESET = "squeezed:-0.5,0.853498"


@pytest.fixture(autouse=True)
def reset_config_cache():
    """Each test sees freshly loaded configuration."""
    config_service._config_cache = None
    yield
    config_service._config_cache = None


@pytest.fixture
def factory():
    """Probe state factory with default tolerances."""
    return ProbeStateFactory()


@pytest.fixture
def engine():
    """Staged evolution engine with default tolerances."""
    return StagedEvolutionEngine()


@pytest.fixture
def design_params():
    """n = 2, N = 16, kappa = 0.2 at theta = pi/32."""
    return StageParams.design(2, 16, 0.2)


@pytest.fixture
def fock1_probe():
    return ModeSpace(40).basis_state(1)


@pytest.fixture
def coherent_probe(factory):
    return factory.build_state(ProbeStateSpec.coherent(1.0, cutoff=40))


@pytest.fixture
def squeezed_probe(factory):
    return factory.build_state(ProbeStateSpec.phase_squeezed(-0.5, 0.853498, cutoff=40))


@pytest.fixture
def vacuum_probe():
    return ModeSpace(40).basis_state(0)


@pytest.fixture
def small_coherent_probe(factory):
    """Coherent probe on a short cutoff for full two-mode runs."""
    return factory.build_state(ProbeStateSpec.coherent(0.5, cutoff=12))


@pytest.fixture
def custom_coefficients_file(tmp_path):
    """Two-column coefficient file holding (|1> + i|2>)/sqrt(2)."""
    path = tmp_path / "probe.txt"
    amplitude = 1.0 / math.sqrt(2.0)
    path.write_text(f"# re im\n0 0\n{amplitude} 0\n0 {amplitude}\n")
    return path


@pytest.fixture
def user_config_file(tmp_path):
    """User configuration overriding the truncate preset."""
    path = tmp_path / "user.yaml"
    path.write_text(yaml.safe_dump({
        "truncate": {"n": 1, "kappa": 0.4, "n_range": "10:30:10"},
        "execution": {"workers": 1},
    }))
    return path


@pytest.fixture
def fast_verify_config():
    """Reduced verification grid."""
    return {
        "n_values": [1, 2],
        "stage_counts": [1, 2, 4, 8],
        "kappas": [0.2, 1.0],
        "probes": ["fock:1", "coherent:0.5"],
        "block_n_max": 2,
        "block_N_max": 16,
        "block_m_max": 6,
        "block_kappas": [0.2, 1.0],
    }

