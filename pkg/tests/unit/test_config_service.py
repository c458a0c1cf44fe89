"""
Unit tests for the configuration service.
"""

import json
import logging

import pytest

from src.core.services.data_services import config_service
from src.core.services.data_services.config_service import (
    get_execution_config,
    get_fig2_config,
    get_simulation_config,
    get_sweep_config,
    get_truncate_config,
    get_verify_config,
    get_version,
    load_config,
    reload_config,
    setup_logging,
)
from src.core.utils.error_handling import ConfigurationError


def test_shipped_defaults():
    config = load_config()
    assert config["app"]["name"] == "zeno-scissors"
    assert config["simulation"]["probe_cutoff"] == 40
    assert get_fig2_config()["probes"] == ["fock:1", "coherent:1.0", "squeezed:-0.5,0.853498"]
    assert get_fig2_config()["n"] == 2
    assert get_fig2_config()["kappa"] == 0.2
    assert get_verify_config()["stage_counts"] == [1, 2, 4, 8, 16, 32]


def test_defaults_are_cached():
    assert load_config() is load_config()


def test_user_file_merged_over_defaults(user_config_file):
    config = load_config(user_config_file)
    assert config["truncate"]["n"] == 1
    assert config["truncate"]["kappa"] == 0.4
    assert config["truncate"]["probe"] == "coherent:1.0"
    assert config["fig2"]["n_max"] == 200
    assert config_service._config_cache is None


def test_missing_user_file(tmp_path):
    with pytest.raises(ConfigurationError, match="not found"):
        load_config(tmp_path / "absent.yaml")


def test_malformed_yaml(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("truncate: [1, 2\n")
    with pytest.raises(ConfigurationError, match="Malformed"):
        load_config(path)


def test_non_mapping_yaml(tmp_path):
    path = tmp_path / "list.yaml"
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigurationError, match="mapping"):
        load_config(path)


def test_environment_placeholders(tmp_path, monkeypatch):
    monkeypatch.setenv("ZENO_TEST_PROBE", "fock:2")
    path = tmp_path / "env.yaml"
    path.write_text("sweep:\n  probe: ${ZENO_TEST_PROBE}\n")
    assert load_config(path)["sweep"]["probe"] == "fock:2"


def test_alternate_defaults_file(tmp_path, monkeypatch):
    path = tmp_path / "defaults.yaml"
    path.write_text("app:\n  version: '9.9.9'\n")
    monkeypatch.setenv(config_service.CONFIG_ENV_VAR, str(path))
    assert get_version() == "9.9.9"


def test_setup_logging_level_override():
    setup_logging("DEBUG")
    assert logging.getLogger().level == logging.DEBUG
    setup_logging("WARNING")
    assert logging.getLogger().level == logging.WARNING


def test_section_getters_read_a_given_mapping(user_config_file):
    config = load_config(user_config_file)
    assert get_truncate_config(config)["kappa"] == 0.4
    assert get_execution_config(config) == {"workers": 1}
    assert get_sweep_config(config)["n_range"] == "1:200"
    assert get_simulation_config(config)["no_outcome_threshold"] == 1e-12
    assert get_truncate_config()["kappa"] == 0.2


def test_missing_or_empty_section():
    assert get_truncate_config({"truncate": None}) == {}
    assert get_execution_config({}) == {}


def test_reload_picks_up_new_defaults(tmp_path, monkeypatch):
    assert get_version() == "1.0.0"
    path = tmp_path / "defaults.yaml"
    path.write_text("app:\n  version: '2.0.0'\n")
    monkeypatch.setenv(config_service.CONFIG_ENV_VAR, str(path))
    assert get_version() == "1.0.0"
    assert reload_config()["app"]["version"] == "2.0.0"
    assert get_version() == "2.0.0"


def test_json_log_file(tmp_path):
    log_path = tmp_path / "run.log"
    config = {"app": {"log_level": "INFO"}, "logging": {"config_file": "logging.yaml", "json_file": str(log_path)}}
    try:
        setup_logging(config=config)
        logging.getLogger("src.core.services").info("cascade finished")
        logging.getLogger("performance").info("sweep: 3 rows")
        for handler in logging.getLogger().handlers:
            handler.flush()
        records = [json.loads(line) for line in log_path.read_text().splitlines()]
    finally:
        setup_logging()
    assert [record["message"] for record in records] == ["cascade finished", "sweep: 3 rows"]
    assert records[1]["logger"] == "performance"


def test_json_log_directory_missing(tmp_path):
    config = {"logging": {"json_file": str(tmp_path / "absent" / "run.log")}}
    with pytest.raises(ConfigurationError, match="Log directory"):
        setup_logging(config=config)
