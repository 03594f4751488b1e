"""Martingale approximation diagnostics (Python front end to the C++ core)."""

import json

from . import _core
from ._core import MartapproxError, beta_coefficients, beta_tail

__version__ = _core.__version__


def run(command, knobs=None, **inputs):
    """Run a command; `inputs` are parsed documents (chain=, g=, coeffs=, fourier=)."""
    config = {"command": command, "knobs": knobs or {}, "inputs": inputs}
    return json.loads(_core.run(json.dumps(config)))


def rerun(report):
    return json.loads(_core.rerun(json.dumps(report)))


def analyze_chain(chain, g):
    """Poisson solution, plus norm and martingale kernel for a finite chain."""
    return json.loads(_core.analyze_chain(json.dumps(chain), json.dumps(g)))


def error_info(exc):
    """Decode a MartapproxError into {"code", "message", "path"}."""
    return json.loads(str(exc))["error"]


__all__ = ["MartapproxError", "analyze_chain", "beta_coefficients", "beta_tail", "error_info", "rerun", "run"]
