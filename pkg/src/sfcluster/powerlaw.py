"""Discrete power-law degree distributions normalized by the Hurwitz zeta function."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

DEFAULT_ZETA_TERMS = 10**7
_CHUNK = 1 << 20


class DivergentSeriesError(ValueError):
    """Raised when the zeta series does not converge (gamma <= 1)."""


@lru_cache(maxsize=64)
def _zeta_sum(gamma: float, k_min: int, terms: int) -> float:
    # Sum smallest terms first; chunked to keep memory flat at 10^7 terms.
    total = 0.0
    stop = k_min + terms
    for hi in range(stop, k_min, -_CHUNK):
        lo = max(k_min, hi - _CHUNK)
        n = np.arange(lo, hi, dtype=np.float64)
        total += float(np.sum(n ** -gamma))
    return total


def hurwitz_zeta(gamma: float, k_min: int = 1, terms: int = DEFAULT_ZETA_TERMS,
                 tail_correction: bool = False) -> float:
    """Truncated Hurwitz zeta sum ``sum_{n=0}^{terms-1} (k_min + n) ** -gamma``.

    With ``tail_correction`` the Euler-Maclaurin remainder
    ``q**(1-gamma)/(gamma-1) + q**-gamma/2`` (``q = k_min + terms``) is added,
    which makes even short sums accurate to many digits.
    """
    if gamma <= 1:
        raise DivergentSeriesError(f"zeta series diverges for gamma={gamma} <= 1")
    if k_min < 1:
        raise ValueError("k_min must be >= 1")
    if terms < 1:
        raise ValueError("terms must be >= 1")
    s = _zeta_sum(float(gamma), int(k_min), int(terms))
    if tail_correction:
        q = float(k_min + terms)
        s += q ** (1.0 - gamma) / (gamma - 1.0) + 0.5 * q ** -gamma
    return s


@dataclass(frozen=True)
class PowerLawParams:
    gamma: float
    k_min: int = 1
    zeta_terms: int = DEFAULT_ZETA_TERMS

    def __post_init__(self):
        if self.gamma <= 1:
            raise DivergentSeriesError(f"gamma must exceed 1, got {self.gamma}")
        if self.k_min < 1:
            raise ValueError("k_min must be >= 1")
        if self.zeta_terms < 1:
            raise ValueError("zeta_terms must be >= 1")
        if not 2 <= self.gamma <= 3:
            warnings.warn(f"gamma={self.gamma} outside the usual scale-free range [2, 3]",
                          stacklevel=3)

    @property
    def normalizer(self) -> float:
        return hurwitz_zeta(self.gamma, self.k_min, self.zeta_terms)


@dataclass(frozen=True)
class DegreeDistribution:
    """Probability mass over degrees ``k = 1..support_max``.

    ``probs[k - 1]`` holds p(k). ``source`` is set for theoretical
    distributions so they can be extended with exact pmf values.
    """

    probs: np.ndarray
    source: PowerLawParams | None = field(default=None, compare=False)

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 1:
            raise ValueError("probs must be one-dimensional")
        if np.any(probs < 0):
            raise ValueError("probabilities must be nonnegative")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def support_max(self) -> int:
        return len(self.probs)

    def p(self, k: int) -> float:
        if 1 <= k <= self.support_max:
            return float(self.probs[k - 1])
        if k > self.support_max and self.source is not None and k >= self.source.k_min:
            return pmf(self.source, k)
        return 0.0

    def total(self) -> float:
        return float(self.probs.sum())

    def padded(self, support_max: int) -> np.ndarray:
        """Probabilities on ``1..support_max``.

        Extra entries are zero for empirical data and exact pmf values for
        theoretical distributions.
        """
        if support_max <= self.support_max:
            return np.array(self.probs[:support_max])
        out = np.zeros(support_max)
        out[: self.support_max] = self.probs
        if self.source is not None:
            ks = np.arange(self.support_max + 1, support_max + 1, dtype=np.float64)
            ext = ks ** -self.source.gamma / self.source.normalizer
            ext[ks < self.source.k_min] = 0.0
            out[self.support_max:] = ext
        return out


def pmf(params: PowerLawParams, k: int) -> float:
    if k < params.k_min:
        raise ValueError(f"degree {k} below k_min={params.k_min}")
    return k ** -params.gamma / params.normalizer


def tail_prob(params: PowerLawParams, k_threshold: int) -> float:
    """P(K > k_threshold) computed as one minus the cumulative pmf."""
    if k_threshold < params.k_min:
        raise ValueError(f"threshold {k_threshold} below k_min={params.k_min}")
    ks = np.arange(params.k_min, k_threshold + 1, dtype=np.float64)
    head = float(np.sum(ks ** -params.gamma))
    return 1.0 - head / params.normalizer


def expected_counts(params: PowerLawParams, n_nodes: int, k_max: int) -> np.ndarray:
    """Expected number of nodes of each degree; entry ``k - 1`` is ``n_nodes * p(k)``."""
    if n_nodes < 1:
        raise ValueError("n_nodes must be >= 1")
    return n_nodes * theoretical_distribution(params, k_max).probs


def theoretical_distribution(params: PowerLawParams, support_max: int) -> DegreeDistribution:
    ks = np.arange(1, support_max + 1, dtype=np.float64)
    probs = ks ** -params.gamma / params.normalizer
    probs[ks < params.k_min] = 0.0
    return DegreeDistribution(probs, source=params)


def mean_degree(params: PowerLawParams) -> float:
    """First moment of the distribution (finite only for gamma > 2)."""
    if params.gamma <= 2:
        raise DivergentSeriesError("mean degree diverges for gamma <= 2")
    return hurwitz_zeta(params.gamma - 1, params.k_min, params.zeta_terms,
                        tail_correction=True) / params.normalizer
