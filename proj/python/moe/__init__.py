"""Model order estimation for noisy low-rank tensors.

Tensors are numpy arrays of float64 with at least two axes. Modes are
0-based axis numbers.
"""

import json

import numpy as np

from . import _core
from ._core import (
    ConfigError,
    FormatError,
    InfeasibleError,
    cp_als,
    cp_construct,
    criterion_curve,
    estimate,
    fold,
    frobenius_norm,
    mode_product,
    mode_singular_values,
    pesdr_trace,
    read_tnsr,
    unfold,
    write_tnsr,
)

__all__ = [
    "ConfigError",
    "FormatError",
    "InfeasibleError",
    "calibrate_threshold",
    "cp_als",
    "cp_construct",
    "criterion_curve",
    "estimate",
    "fold",
    "frobenius_norm",
    "global_eigenvalues",
    "mode_product",
    "mode_singular_values",
    "pesdr_trace",
    "plant",
    "pod_vs_snr",
    "read_tnsr",
    "unfold",
    "write_tnsr",
]


def global_eigenvalues(tensor):
    """Return (values, logs) of the tensor rescaled to unit norm."""
    values, logs = _core.global_eigenvalues(tensor)
    return np.asarray(values), np.asarray(logs)


def plant(scenario, trial=0, snr_db=None):
    """Draw one trial of a scenario dict. Returns noisy, signal and factors."""
    return _core.plant(json.dumps(scenario), trial, snr_db)


def calibrate_threshold(scenario, rho_grid, threads=1):
    """Pfp, Pfn and PoD per method and threshold, as a dict."""
    return json.loads(_core.calibrate_threshold(json.dumps(scenario), list(rho_grid), threads))


def pod_vs_snr(scenario, snr_grid, threads=1):
    """PoD per method and SNR, as a dict."""
    return json.loads(_core.pod_vs_snr(json.dumps(scenario), list(snr_grid), threads))
