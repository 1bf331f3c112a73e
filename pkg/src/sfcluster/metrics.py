"""Trace distance and fidelity between discrete degree distributions."""

from __future__ import annotations

import math

import numpy as np

from sfcluster.powerlaw import DegreeDistribution


def align(p, q) -> tuple[np.ndarray, np.ndarray]:
    """Bring two distributions onto the common support ``1..max(S_p, S_q)``.

    :class:`DegreeDistribution` inputs are padded according to their kind
    (zeros for empirical, pmf values for theoretical). Plain sequences are
    zero-padded.
    """
    n = max(_support(p), _support(q))
    return _pad(p, n), _pad(q, n)


def trace_distance(p, q) -> float:
    a, b = align(p, q)
    return 0.5 * math.fsum(np.abs(a - b))


def fidelity(p, q) -> float:
    """Correctly rounded sum of ``sqrt(p q)``; ``fidelity(p, p)`` is exactly ``sum(p)``."""
    a, b = align(p, q)
    return math.fsum(np.sqrt(a * b))


def _support(p) -> int:
    if isinstance(p, DegreeDistribution):
        return p.support_max
    return len(p)


def _pad(p, n: int) -> np.ndarray:
    if isinstance(p, DegreeDistribution):
        return p.padded(n)
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 1 or np.any(arr < 0):
        raise ValueError("expected a nonnegative 1-d probability vector")
    out = np.zeros(n)
    out[: len(arr)] = arr
    return out
