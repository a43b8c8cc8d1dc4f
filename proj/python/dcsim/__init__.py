"""Data center cooling and IT power simulator (native core)."""

from ._core import *  # noqa: F401,F403
from ._core import Environment, load_config, load_inputs

__all__ = ["Environment", "load_config", "load_inputs", "make_env"]


def make_env(config_path, weather, ci, workload, **options):
    """Environment from a config file and the three trace CSVs."""
    cfg = load_config(config_path)
    inputs = load_inputs(weather, ci, workload, int(cfg.timestep_seconds))
    return Environment(cfg, inputs, **options)
