"""Dyadic extremal weights: exact construction, operators and Bellman checks."""

import json

from ._del import (
    __version__,
    a2,
    default_k,
    main_inequality,
    parameters,
    phi,
    run_cli,
    weight,
)
from ._del import experiment as _experiment


def experiment(k_min=2, k_max=2, levels=None, suites="all", seed=0):
    """Runs the experiment sweep and returns the parsed JSON document."""
    return json.loads(_experiment(k_min, k_max, levels, suites, seed))


__all__ = [
    "__version__",
    "a2",
    "default_k",
    "experiment",
    "main_inequality",
    "parameters",
    "phi",
    "run_cli",
    "weight",
]
