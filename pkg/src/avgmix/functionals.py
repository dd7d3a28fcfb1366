"""Distance and entropy functionals of a state vector.

All logarithms are natural.  Sums use ``math.fsum`` so that monotonicity
checks are not polluted by summation-order noise.
"""

from __future__ import annotations

import math

import numpy as np

LOG2 = math.log(2.0)
MASS_TOL = 1e-9


def _values(v) -> np.ndarray:
    return np.asarray(getattr(v, "values", v), dtype=np.float64)


def distance(v, q: int = 1, mean: float | None = None) -> tuple[float, float]:
    """``(||v - vbar||_q^q, ||v - vbar||_q)`` for ``q`` in {1, 2}.

    ``mean`` defaults to the state's recorded mean (or the sample mean for a
    bare array).
    """
    x = _values(v)
    if mean is None:
        mean = v.mean if hasattr(v, "values") else math.fsum(x) / x.size
    dev = np.abs(x - mean)
    if q == 1:
        s = math.fsum(dev)
        return s, s
    if q == 2:
        s = math.fsum(dev * dev)
        return s, math.sqrt(s)
    raise ValueError("q must be 1 or 2")


def check_probability(v, tol: float = MASS_TOL) -> np.ndarray:
    x = _values(v)
    if np.any(x < 0):
        raise ValueError("probability vector has a negative coordinate")
    total = math.fsum(x)
    if abs(total - 1.0) > tol:
        raise ValueError(f"probability vector sums to {total!r}, not 1")
    return x


def xlogx(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x, dtype=np.float64)
    pos = x > 0
    out[pos] = x[pos] * np.log(x[pos])
    return out


def entropy(v) -> float:
    """Shannon entropy ``sum v_i log(1/v_i)`` with ``0 log 0 = 0``."""
    x = check_probability(v)
    return -math.fsum(xlogx(x))


def augmented_entropy(v, beta) -> float:
    """Entropy plus the linear penalty ``beta . v``."""
    x = check_probability(v)
    b = np.asarray(beta, dtype=np.float64)
    if np.any(b < 0):
        raise ValueError("beta must be non-negative")
    return -math.fsum(xlogx(x)) + math.fsum(b * x)


def is_probability(v, tol: float = MASS_TOL) -> bool:
    x = _values(v)
    return bool(np.all(x >= 0) and abs(math.fsum(x) - 1.0) <= tol)
