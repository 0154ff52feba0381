"""
Configuration and Logging
=========================

Defaults for every tunable live in DEFAULT_CONFIG and in
configs/default.yaml; a user file only needs the keys it changes.
"""

import copy
import logging
import os
import sys
from typing import Any, Dict, Optional

import yaml

logger = logging.getLogger(__name__)

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DEFAULT_CONFIG_PATH = os.path.join(REPO_ROOT, "configs", "default.yaml")

DEFAULT_CONFIG: Dict[str, Any] = {
    "search": {
        "max_denominator": 64,
        "jobs": 1,
        "seed": 42,
    },
    "local_monoid": {
        "certificate_limit": 200,
    },
    "counting": {
        "max_enumeration": 1000000,
    },
    "sweeps": {
        "admissible": 500,
        "pushout_decision": 200,
        "stabilization": 100,
        "stabilization_orders": 20,
        "factorization": 100,
        "picard_max_vertices": 7,
        "initial_contraction": 100,
        "counting_max_enumeration": 10000,
    },
    "selftest": {
        "corpus": "corpus",
        "smoke": {
            "admissible": 40,
            "pushout_decision": 20,
            "stabilization": 10,
            "stabilization_orders": 3,
            "factorization": 10,
            "picard_max_vertices": 4,
            "initial_contraction": 10,
            "counting_max_enumeration": 200,
        },
    },
    "logging": {
        "level": "WARNING",
    },
}

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class ConfigError(ValueError):
    """Unreadable configuration file or one with the wrong shape."""


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def load_config(config_path: Optional[str] = None) -> Dict[str, Any]:
    """
    Load a YAML config merged over the defaults.

    Args:
        config_path: file to read; None reads configs/default.yaml when it
            exists and otherwise returns the built-in defaults

    Returns:
        The merged configuration dictionary.
    """
    path = config_path or DEFAULT_CONFIG_PATH
    if config_path is None and not os.path.exists(path):
        return copy.deepcopy(DEFAULT_CONFIG)
    try:
        with open(path, "r") as f:
            loaded = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if loaded is None:
        loaded = {}
    if not isinstance(loaded, dict):
        raise ConfigError(f"config {path} must contain a mapping at the top level")
    return _merge(DEFAULT_CONFIG, loaded)


def configure_logging(level: str = "WARNING") -> None:
    """One stderr handler; stdout stays reserved for documents."""
    numeric = getattr(logging, str(level).upper(), None)
    if not isinstance(numeric, int):
        raise ConfigError(f"unknown log level {level!r}")
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(numeric)
