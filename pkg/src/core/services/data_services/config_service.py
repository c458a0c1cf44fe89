"""
Configuration service for the Zeno vacuum-scissors simulator.

This module provides centralized configuration management for the application,
loading settings from YAML files and environment variables.
"""

import copy
import logging
import logging.config
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from src.core.utils.error_handling import ConfigurationError

logger = logging.getLogger(__name__)

# Repository-relative location of the shipped defaults
CONFIG_DIR = Path(__file__).resolve().parents[4] / "config"
CONFIG_ENV_VAR = "ZENO_SCISSORS_CONFIG"
JSON_LOG_MAX_BYTES = 10485760  # 10MB
JSON_LOG_BACKUPS = 5

# Global configuration cache
_config_cache: Optional[Dict[str, Any]] = None


def _read_yaml(path: Path) -> Dict[str, Any]:
    """Read a YAML mapping from disk."""
    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f) or {}
    except OSError as e:
        raise ConfigurationError(f"Cannot read configuration file {path}: {e}")
    except yaml.YAMLError as e:
        raise ConfigurationError(f"Malformed YAML in {path}: {e}")

    if not isinstance(data, dict):
        raise ConfigurationError(f"Configuration file {path} must contain a mapping")
    return data


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Merge ``override`` into a copy of ``base``, recursing into mappings."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _replace_env_vars(config: Any) -> Any:
    """Replace environment variable placeholders in configuration."""
    if isinstance(config, dict):
        return {k: _replace_env_vars(v) for k, v in config.items()}
    elif isinstance(config, list):
        return [_replace_env_vars(v) for v in config]
    elif isinstance(config, str) and config.startswith("${") and config.endswith("}"):
        env_var = config[2:-1]
        return os.getenv(env_var, "")
    else:
        return config


def load_config(path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """
    Load configuration from YAML files and environment variables.

    Args:
        path: Optional user configuration file merged over the shipped defaults

    Returns:
        The merged configuration mapping
    """
    global _config_cache

    if _config_cache is not None and path is None:
        return _config_cache

    defaults_path = Path(os.getenv(CONFIG_ENV_VAR, CONFIG_DIR / "config.yaml"))
    config: Dict[str, Any] = {}
    if defaults_path.exists():
        config = _read_yaml(defaults_path)
    else:
        logger.warning(f"Default configuration not found at {defaults_path}")

    if path is not None:
        user_path = Path(path)
        if not user_path.exists():
            raise ConfigurationError(f"Configuration file not found: {user_path}", key="config")
        config = _deep_merge(config, _read_yaml(user_path))
        logger.debug(f"Merged user configuration from {user_path}")

    config = _replace_env_vars(config)

    if path is None:
        _config_cache = config
    return config


def get_config() -> Dict[str, Any]:
    """Get the application configuration."""
    return load_config()


def reload_config() -> Dict[str, Any]:
    """Drop the cached defaults and read them again."""
    global _config_cache
    _config_cache = None
    return load_config()


def _section(name: str, config: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    source = get_config() if config is None else config
    return source.get(name) or {}


def get_app_config(config: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Get application metadata."""
    return _section("app", config)


def get_simulation_config(config: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Get numerical simulation settings (cutoffs, tolerances)."""
    return _section("simulation", config)


def get_fig2_config(config: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Get the emission-probability preset."""
    return _section("fig2", config)


def get_truncate_config(config: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Get truncation-sweep defaults."""
    return _section("truncate", config)


def get_sweep_config(config: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Get single-probe sweep defaults."""
    return _section("sweep", config)


def get_verify_config(config: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Get verification grid and tolerances."""
    return _section("verify", config)


def get_execution_config(config: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Get worker-pool settings."""
    return _section("execution", config)


def get_log_level(config: Optional[Dict[str, Any]] = None) -> str:
    """Get the configured log level."""
    return get_app_config(config).get("log_level", "INFO")


def get_version() -> str:
    """Get the artifact version echoed into output headers."""
    return str(get_app_config().get("version", "0.0.0"))


def setup_logging(level: Optional[str] = None, config: Optional[Dict[str, Any]] = None) -> None:
    """
    Apply ``config/logging.yaml`` and an optional root level override.

    Args:
        level: Root log level; defaults to ``app.log_level``
        config: Configuration mapping; defaults to the shipped configuration
    """
    settings = _section("logging", config)
    logging_path = Path(settings.get("config_file") or "logging.yaml")
    if not logging_path.is_absolute():
        logging_path = CONFIG_DIR / logging_path

    if logging_path.exists():
        logging_config = _read_yaml(logging_path)
        json_file = settings.get("json_file")
        if json_file:
            _attach_json_file(logging_config, Path(json_file))
        logging.config.dictConfig(logging_config)
    else:
        logging.basicConfig(level=logging.INFO)

    logging.getLogger().setLevel((level or get_log_level(config)).upper())


def _attach_json_file(logging_config: Dict[str, Any], path: Path) -> None:
    """Route the root and performance loggers to a rotating JSON-lines file as well."""
    if not path.parent.exists():
        raise ConfigurationError(f"Log directory does not exist: {path.parent}", key="logging.json_file")
    logging_config.setdefault("handlers", {})["json_file"] = {
        "class": "logging.handlers.RotatingFileHandler",
        "level": "DEBUG",
        "formatter": "json",
        "filename": str(path),
        "maxBytes": JSON_LOG_MAX_BYTES,
        "backupCount": JSON_LOG_BACKUPS,
        "encoding": "utf8",
    }
    for name in ("", "performance"):
        logger_config = logging_config.setdefault("loggers", {}).setdefault(name, {})
        logger_config["handlers"] = list(logger_config.get("handlers", [])) + ["json_file"]
