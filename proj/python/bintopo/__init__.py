"""Binary topology optimization with multi-agent bandit learners.

Designs are numpy arrays of 0/1 indexed ``[y, x]`` (or ``[z, y, x]``).
Keyword hyperparameters are passed through as strings, so
``hidden=[64, 64]`` and ``hidden="64,64"`` are equivalent.
"""

from __future__ import annotations

from typing import Any

from . import _core
from ._core import (
    ConfigError,
    Environment,
    Error,
    FormatError,
    IncompatibleAlgorithm,
    IoError,
    NotSteadyState,
    ShapeMismatch,
    SimulationDiverged,
    apply_fabrication,
    design_variance,
    gol_step,
    load_pbd,
    optimizer_names,
    save_pbd,
    splitter_objective,
)

__all__ = [
    "ConfigError",
    "Environment",
    "Error",
    "FormatError",
    "IncompatibleAlgorithm",
    "IoError",
    "NotSteadyState",
    "ShapeMismatch",
    "SimulationDiverged",
    "apply_fabrication",
    "design_variance",
    "environment",
    "gol_step",
    "load_pbd",
    "optimizer_names",
    "run",
    "run_experiment",
    "save_pbd",
    "splitter_objective",
]


def _param(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(_param(v) for v in value)
    return str(value)


def environment(name: str, **params: Any) -> Environment:
    """Builds ``gol``, ``synthetic``, ``bend`` or ``splitter``."""
    return _core.make_environment(name, {k: _param(v) for k, v in params.items()})


def run(env: Environment, algorithm: str, budget: int, seed: int = 0,
        record_designs: bool = False, **params: Any) -> dict:
    """Best-of-``budget`` run. ``trace`` rows are (step, payoff, best so far)."""
    return _core.run(env, algorithm, budget, seed,
                     {k: _param(v) for k, v in params.items()}, record_designs)


def run_experiment(path: str, budget: int | None = None, seeds: list[int] | None = None,
                   out_dir: str | None = None, jobs: int | None = None,
                   write: bool = False) -> dict:
    """Runs a config file; with ``write`` the usual output files are produced."""
    return _core.run_experiment(path, budget or 0, list(seeds or []), out_dir or "",
                                -1 if jobs is None else jobs, write)
