"""Small-time heat-kernel asymptotics at conjugate and cut points."""

import json as _json

from . import _heatlocus
from ._heatlocus import HeatlocusError, catalog_labels, command_names, leading_constant

__all__ = [
    "HeatlocusError",
    "catalog_labels",
    "classify_catalog",
    "command_names",
    "expand",
    "leading_constant",
    "predict",
    "predict_bounds",
    "run",
]


class CommandResult:
    """Output of one command: primary text, optional JSON sidecar, exit status and parsed data."""

    def __init__(self, raw):
        self.primary = raw["primary"]
        self.format = raw["format"]
        self.sidecar = raw["sidecar"]
        self.status = raw["status"]
        self.data = _json.loads(raw["data"])

    def __repr__(self):
        return f"CommandResult(format={self.format!r}, status={self.status})"


def run(command, config, seed=None, verify=False):
    """Runs a CLI command (geodesic, distance, cutlocus, classify, predict, laplace-check) on a config dict."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return CommandResult(_heatlocus.run_command(command, text, seed, verify))


def predict(n, m_list, constants_available=True):
    """Exponent, remainder and regime for minimizers of types m_list (unit constants)."""
    return _json.loads(_heatlocus.predict(n, list(m_list), constants_available))


def predict_bounds(n, r):
    """Exponent bounds (n/2 + r/4, n/2 + r/2) for Hessian rank deficit r."""
    return _json.loads(_heatlocus.predict_bounds(n, r))


def expand(m_list, f0=1.0, f_second_derivs=(), g0=0.0):
    """Two-term Laplace expansion constants for the phase g0 + sum x_i^(2 m_i).

    f_second_derivs lists d^2 f / dx_k^2 at 0 for k = l..n; empty means all zero.
    """
    return _json.loads(_heatlocus.expand(list(m_list), f0, list(f_second_derivs), g0))


def classify_catalog(label, n):
    """Singularity report of a catalog normal form suspended to dimension n."""
    return _json.loads(_heatlocus.classify_catalog(label, n))
