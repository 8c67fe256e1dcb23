"""Input validation helpers shared by the estimators and the CLI."""

from __future__ import annotations

import numpy as np


def check_abscissae(s):
    s = np.asarray(s, dtype=complex).reshape(-1)
    if s.size == 0:
        raise ValueError("no sample abscissae given")
    if not np.all(np.isfinite(s)):
        raise ValueError("sample abscissae must be finite")
    if np.unique(s).size != s.size:
        raise ValueError("sample abscissae must be distinct")
    return s


def check_complex_response(values, n):
    values = np.asarray(values, dtype=complex).reshape(-1)
    if values.size != n:
        raise ValueError(f"expected {n} response values, got {values.size}")
    if not np.all(np.isfinite(values)):
        raise ValueError("response values must be finite")
    return values


def check_band(band, upper=None):
    lo, hi = (float(x) for x in band)
    if not (0 <= lo < hi):
        raise ValueError(f"band must satisfy 0 <= lo < hi, got {band}")
    if upper is not None and hi > upper * (1 + 1e-12):
        raise ValueError(f"band upper edge {hi} exceeds {upper}")
    return lo, hi


def check_zpk_vector(x, n_zeros, n_poles):
    x = np.asarray(x, dtype=float).reshape(-1)
    expected = 2 * n_zeros + 2 * n_poles + 1
    if x.size != expected:
        raise ValueError(f"parameter vector has {x.size} entries, expected {expected}")
    if not np.all(np.isfinite(x)):
        raise ValueError("parameter vector must be finite")
    return x
