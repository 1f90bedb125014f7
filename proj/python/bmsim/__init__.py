"""Python access to the bmsim Brownian motion simulator.

Generator specs and experiment configs are plain dicts with the same shape as
the JSON config files; reports come back as dicts.
"""

from __future__ import annotations

import json
import os
from typing import Any, Mapping, Optional

import numpy as np

from . import _core
from ._core import ConfigError, DomainError, IoError, PreconditionError, SpecError

__all__ = [
    "ConfigError",
    "DomainError",
    "IoError",
    "PreconditionError",
    "SpecError",
    "emit_law_table",
    "evaluate",
    "functional_names",
    "grid_times",
    "ks_test",
    "law",
    "law_names",
    "run_experiment",
    "simulate",
]


def _as_json(obj: Any) -> str:
    return obj if isinstance(obj, str) else json.dumps(obj)


def simulate(generator: Mapping[str, Any], seed: int, count: int, workers: int = 1) -> np.ndarray:
    """Paths 0..count-1 of the ensemble as rows of a (count, steps+1) array."""
    return _core.simulate(_as_json(generator), seed, count, workers)


def grid_times(generator: Mapping[str, Any]) -> np.ndarray:
    return np.asarray(_core.grid_times(_as_json(generator)))


def evaluate(name: str, paths: np.ndarray, horizon: float, **params: float) -> np.ndarray:
    """A named path functional on every row of `paths`; censored values are NaN."""
    paths = np.atleast_2d(np.asarray(paths, dtype=float))
    return _core.evaluate(name, {k: float(v) for k, v in params.items()}, paths, float(horizon))


def functional_names() -> list[str]:
    return _core.functional_names()


def law(name: str, **params: float) -> float:
    return _core.law(name, {k: float(v) for k, v in params.items()})


def law_names() -> list[str]:
    return _core.law_names()


def ks_test(sample: np.ndarray, distribution: str, alpha: float = 0.05, **params: float) -> dict:
    report = _core.ks_test(np.asarray(sample, dtype=float).ravel(), distribution,
                           {k: float(v) for k, v in params.items()}, alpha)
    return json.loads(report)


def run_experiment(config: Mapping[str, Any] | str, output_dir: Optional[os.PathLike | str] = None,
                   workers: int = 1, paths_to_write: int = 0) -> list[dict]:
    """Runs an experiment config; writes the usual output files when `output_dir` is given."""
    out = None if output_dir is None else os.fspath(output_dir)
    return [json.loads(r) for r in _core.run_experiment(_as_json(config), out, workers, paths_to_write)]


def emit_law_table(law_name: str, grid: str, file: os.PathLike | str) -> None:
    """Writes a law table CSV; `grid` uses the CLI syntax, e.g. "a=1;T=0.5:4:8"."""
    _core.emit_law_table(law_name, grid, os.fspath(file))
