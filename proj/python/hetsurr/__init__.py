"""Heterogeneous surrogate strength estimation.

The heavy lifting happens in the compiled ``_core`` module; this package adds
a few conveniences on top (JSON decoding, one-call estimation).
"""

from __future__ import annotations

import json

import numpy as np

from ._core import (
    REPORT_FORMAT_VERSION,
    ArgumentError,
    Bootstrap,
    DomainError,
    FittedModel,
    HetsurrError,
    InsufficientDataError,
    ParseError,
    SchemaError,
    ValidationError,
    bh_adjust,
    bootstrap,
    default_delta_floor,
    fit,
    simulate,
    true_pte,
)
from ._core import run_study as _run_study

__all__ = [
    "REPORT_FORMAT_VERSION",
    "ArgumentError",
    "Bootstrap",
    "DomainError",
    "FittedModel",
    "HetsurrError",
    "InsufficientDataError",
    "ParseError",
    "SchemaError",
    "ValidationError",
    "bh_adjust",
    "bootstrap",
    "default_delta_floor",
    "estimate",
    "fit",
    "run_study",
    "simulate",
    "true_pte",
]


def run_study(setting: int, **kwargs) -> dict:
    """Run a Monte Carlo study and return the decoded report."""
    return json.loads(_run_study(setting, **kwargs))


def estimate(y, s, g, x, test_x, *, family="linear", seed=0, delta_floor=None, **params):
    """Fit on (y, s, g, x) and estimate delta, delta_s and r_s at ``test_x``."""
    y = np.asarray(y, dtype=float)
    model = fit(y, s, g, x, family=family, seed=seed, **params)
    floor = default_delta_floor(y) if delta_floor is None else float(delta_floor)
    return model.estimate(np.asarray(test_x, dtype=float), floor)
