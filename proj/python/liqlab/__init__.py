"""Python access to the liqlab simulators and estimators."""

import json

from . import _core
from ._core import (
    Ccdf,
    GeometricFit,
    SpreadPath,
    chi_theory,
    empirical_sf,
    first_passage_prob,
    fit_geometric,
    run_spread,
)

__version__ = _core.version


def theory(model, **params):
    """Closed-form predictions, e.g. theory("spread_linear", lambda0_plus=0.5, lambda0_minus=1, alpha=0.25)."""
    return json.loads(_core.theory_json(model, {k: float(v) for k, v in params.items()}))


def simulate(config):
    """Result rows (one dict per replica) for a config given as a dict or JSON string."""
    if not isinstance(config, str):
        config = json.dumps(config)
    return _core.simulate_rows(config)


def config_hash(config):
    if not isinstance(config, str):
        config = json.dumps(config)
    return _core.config_hash(config)


__all__ = [
    "Ccdf",
    "GeometricFit",
    "SpreadPath",
    "chi_theory",
    "config_hash",
    "empirical_sf",
    "first_passage_prob",
    "fit_geometric",
    "run_spread",
    "simulate",
    "theory",
]
