"""Cucker-Smale flocking: particle simulation, mean-field constants and
propagation-of-chaos experiments backed by a C++ core."""

import json

from ._core import (
    ConfigError,
    FlockingViolated,
    InvalidArgument,
    NumericalBlowUp,
    SizeCapExceeded,
    __version__,
    c_mf,
    c_stab,
    flocking_condition,
    lipschitz,
    simulate,
    tail_integral,
    w2,
    x_infinity,
)
from . import _core


def default_config():
    """Reference experiment configuration as a dict."""
    return json.loads(_core.default_config_json())


def run_experiment(kind, config=None, perturbation=0.01, threads=0):
    """Run 'coupling', 'w2rate', 'stability' or 'telescope'.

    `config` is a dict of overrides (unspecified keys take the defaults).
    """
    text = json.dumps(config or {})
    return _core.run_experiment(kind, text, perturbation, threads)


__all__ = [
    "ConfigError",
    "FlockingViolated",
    "InvalidArgument",
    "NumericalBlowUp",
    "SizeCapExceeded",
    "__version__",
    "c_mf",
    "c_stab",
    "default_config",
    "flocking_condition",
    "lipschitz",
    "run_experiment",
    "simulate",
    "tail_integral",
    "w2",
    "x_infinity",
]
