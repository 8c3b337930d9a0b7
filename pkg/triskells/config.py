"""Configuration loading.

Reads ``config.yaml`` from the project root, or the file named by the
``TRISKELLS_CONFIG`` environment variable, and merges it over built-in
defaults. Library functions resolve their ``None`` parameters against
``settings()``.
"""

import copy
import logging
import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional

try:
    import yaml
    HAS_YAML = True
except ImportError:
    HAS_YAML = False

logger = logging.getLogger(__name__)

DEFAULTS: Dict[str, Any] = {
    "tolerance": {"absolute": 1e-9},
    "series": {"max_terms": 10000},
    "bounds": {"det_dimension": 10, "fock_carrier": 10, "multiset_degree": 4},
    "checks": {"seed": 0, "jobs": 1, "trials": {}, "max_size": {}},
    "display": {"verbose": False, "pretty_json": True},
}


@dataclass(frozen=True)
class Settings:
    tol: float
    max_terms: int
    det_bound: int
    fock_bound: int
    degree_bound: int
    seed: int
    jobs: int
    trials: Dict[str, int]
    max_size: Dict[str, int]
    verbose: bool
    pretty_json: bool


def config_path() -> Path:
    """Location of the active config file."""
    override = os.environ.get("TRISKELLS_CONFIG")
    if override:
        return Path(override).expanduser()
    return Path(__file__).parent.parent / "config.yaml"


def _merge(base: Dict[str, Any], extra: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(path: Optional[Path] = None) -> Dict[str, Any]:
    """Load config.yaml merged over DEFAULTS."""
    path = path or config_path()
    if not path.exists():
        logger.debug("no config file at %s, using defaults", path)
        return copy.deepcopy(DEFAULTS)
    if not HAS_YAML:
        logger.warning("PyYAML not installed, ignoring %s", path)
        return copy.deepcopy(DEFAULTS)
    with open(path, "r") as f:
        loaded = yaml.safe_load(f) or {}
    return _merge(DEFAULTS, loaded)


@lru_cache(maxsize=1)
def settings() -> Settings:
    config = load_config()
    return Settings(
        tol=float(config["tolerance"]["absolute"]),
        max_terms=int(config["series"]["max_terms"]),
        det_bound=int(config["bounds"]["det_dimension"]),
        fock_bound=int(config["bounds"]["fock_carrier"]),
        degree_bound=int(config["bounds"]["multiset_degree"]),
        seed=int(config["checks"]["seed"]),
        jobs=int(config["checks"]["jobs"]),
        trials=dict(config["checks"].get("trials") or {}),
        max_size=dict(config["checks"].get("max_size") or {}),
        verbose=bool(config["display"]["verbose"]),
        pretty_json=bool(config["display"]["pretty_json"]),
    )
