"""Small numerical helpers for measuring frequencies and convergence orders."""
from __future__ import annotations

import numpy as np


def zero_crossings(t, y) -> np.ndarray:
    """Times where ``y`` changes sign, by linear interpolation."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    s = np.signbit(y)
    idx = np.nonzero(s[1:] != s[:-1])[0]
    return t[idx] - y[idx] * (t[idx + 1] - t[idx]) / (y[idx + 1] - y[idx])


def oscillation_frequency(t, y) -> float:
    """Angular frequency from the mean spacing of interpolated zero crossings."""
    tc = zero_crossings(t, y)
    if len(tc) < 3:
        raise ValueError("need at least three zero crossings to estimate a frequency")
    half_period = (tc[-1] - tc[0]) / (len(tc) - 1)
    return float(np.pi / half_period)


def observed_orders(errors) -> np.ndarray:
    """``log2(e_i / e_{i+1})`` for a sequence of errors under successive halving."""
    e = np.asarray(errors, dtype=float)
    return np.log2(e[:-1] / e[1:])
