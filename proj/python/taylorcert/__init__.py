"""Certified truncated-Taylor ODE integration.

Experiments take a config as a dict, a JSON string or a path to a JSON file
and return the parsed report.
"""

import json
import os

from . import _core
from ._core import TaylorCertError, aggregate, h_bound, segment_growth

__all__ = [
    "TaylorCertError",
    "aggregate",
    "certify",
    "certify_continuous",
    "certify_impulsive",
    "certify_unperturbed",
    "h_bound",
    "normalize_config",
    "run",
    "segment_growth",
    "shadow",
    "sweep",
]


def _text(config):
    if isinstance(config, dict):
        return json.dumps(config)
    if isinstance(config, os.PathLike) or (isinstance(config, str) and os.path.isfile(config)):
        with open(config, encoding="utf-8") as fh:
            return fh.read()
    return config


def normalize_config(config):
    return json.loads(_core.normalize_config(_text(config)))


def run(config):
    return json.loads(_core.run(_text(config)))


def certify(config):
    return json.loads(_core.certify(_text(config)))


def shadow(config):
    return json.loads(_core.shadow(_text(config)))


def sweep(config):
    """Returns (report, summary_csv_text)."""
    report, csv_text = _core.sweep(_text(config))
    return json.loads(report), csv_text


def certify_unperturbed(K, K1, F0, ell, rho, J, h, e0=0.0):
    return json.loads(_core.certify_unperturbed(K, K1, F0, ell, rho, J, h, e0))


def certify_impulsive(K, K1, F0, ell, rho, J, h, gbar, e0=0.0):
    return json.loads(_core.certify_impulsive(K, K1, F0, ell, rho, J, h, list(gbar), e0))


def certify_continuous(K, K1, F0, ell, rho, J, h, lam, gbar=(), e0=0.0):
    return json.loads(_core.certify_continuous(K, K1, F0, ell, rho, J, list(h), list(lam), list(gbar), e0))
