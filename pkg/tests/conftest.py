"""Shared fixtures: bundled config loading with output redirected to tmp dirs."""

from importlib import resources

import pytest

from swarmscale.config import load_config


def bundled_config_path(name):
    return resources.files("swarmscale.configs") / f"{name}.yaml"


@pytest.fixture
def load_bundled(tmp_path):
    """Load a bundled config with its output directory pointed at tmp_path."""

    def _load(name, **overrides):
        from dataclasses import replace

        cfg = load_config(bundled_config_path(name))
        overrides.setdefault("output", str(tmp_path / name))
        return replace(cfg, **overrides)

    return _load
