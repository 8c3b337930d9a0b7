"""Shared fixtures for triskells tests."""

import json
import os
import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from triskells.config import DEFAULTS, _merge, settings
from triskells.generators import trial_rng
from triskells.serialize import to_json

# Project paths
PROJECT_ROOT = Path(__file__).parent.parent

# Trial counts used by the suites under test; small enough for CI
TEST_TRIALS = 12


@pytest.fixture(scope="session", autouse=True)
def test_config(tmp_path_factory):
    """Point every test at an isolated config file.

    This ensures tests NEVER depend on the project config.yaml.
    """
    config_dir = tmp_path_factory.mktemp("test_config")
    config = _merge(DEFAULTS, {"checks": {"seed": 7, "trials": {}}})
    config_file = config_dir / "config.yaml"
    config_file.write_text(yaml.safe_dump(config))

    previous = os.environ.get("TRISKELLS_CONFIG")
    os.environ["TRISKELLS_CONFIG"] = str(config_file)
    settings.cache_clear()
    yield config_file

    # Cleanup
    if previous is None:
        os.environ.pop("TRISKELLS_CONFIG", None)
    else:
        os.environ["TRISKELLS_CONFIG"] = previous
    settings.cache_clear()


@pytest.fixture
def rng():
    """Seeded generator; each test gets the same stream."""
    return trial_rng(1234, 0)


@pytest.fixture
def write_doc(tmp_path):
    """Factory fixture to write a library object (or a raw dict) as a JSON file."""
    def _write_doc(obj, name: str = "doc.json") -> Path:
        path = tmp_path / name
        doc = obj if isinstance(obj, dict) else to_json(obj)
        path.write_text(json.dumps(doc, indent=2))
        return path
    return _write_doc


@pytest.fixture
def run_cli(test_config):
    """Factory fixture running ``python -m triskells.cli`` in a subprocess."""
    def _run_cli(*args: str, timeout: int = 300) -> subprocess.CompletedProcess:
        env = os.environ.copy()
        env["TRISKELLS_CONFIG"] = str(test_config)
        env["PYTHONIOENCODING"] = "utf-8"
        env["PYTHONPATH"] = str(PROJECT_ROOT) + os.pathsep + env.get("PYTHONPATH", "")
        return subprocess.run(
            [sys.executable, "-m", "triskells.cli", *map(str, args)],
            capture_output=True,
            encoding="utf-8",
            cwd=str(PROJECT_ROOT),
            env=env,
            timeout=timeout,
        )
    return _run_cli
