"""Biased random walks: Metropolis/Baker acceptance, chain construction, stationarity.

Chains built from a proposal ``q`` and target ``pi`` follow
``p_ij = q_ij * a_ij`` off the diagonal with the rejected mass left on
``p_ii``. :func:`degree_bias_matrix` builds the degree- and id-biased walk
on an overlay graph that the distributed builder samples from.
"""

from __future__ import annotations

import bisect
import logging
import math
import random
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from sfcluster.graph import Graph, connected_components

log = logging.getLogger(__name__)

ROW_TOL = 1e-9
EXPLICIT_LIMIT = 10_000


class DisconnectedGraphError(ValueError):
    def __init__(self, components: list[list[int]]):
        shown = ", ".join(f"{{{c[0]}..}} size {len(c)}" for c in components[:8])
        more = "" if len(components) <= 8 else f" and {len(components) - 8} more"
        super().__init__(f"graph has {len(components)} components: {shown}{more}")
        self.components = components


def _check_pi(pi_i: float, pi_j: float) -> None:
    if pi_i <= 0 or pi_j <= 0:
        raise ValueError("target probabilities must be strictly positive")


def metropolis_accept(pi_i: float, pi_j: float) -> float:
    _check_pi(pi_i, pi_j)
    r = pi_j / pi_i
    return 1.0 if r >= 1 else r


def baker_accept(pi_i: float, pi_j: float) -> float:
    _check_pi(pi_i, pi_j)
    return pi_j / (pi_i + pi_j)


RULES = {"metropolis": metropolis_accept, "baker": baker_accept}


@dataclass(frozen=True)
class MarkovChain:
    """Row-stochastic transition matrix (dense or CSR) and optional target.

    States are ``0..n_states-1``; for graph walks state ``i - 1`` is node ``i``.
    """

    transition: np.ndarray | sparse.csr_array
    target: np.ndarray | None = None
    residual: float = 0.0
    _rows: list = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        P = self.transition
        if P.shape[0] != P.shape[1]:
            raise ValueError("transition matrix must be square")
        sums = np.asarray(P.sum(axis=1)).ravel()
        if np.any(np.abs(sums - 1.0) > ROW_TOL):
            raise ValueError(f"rows do not sum to 1 (worst {np.abs(sums - 1).max():.3g})")
        if (P.min() if not sparse.issparse(P) else P.data.min(initial=0.0)) < -ROW_TOL:
            raise ValueError("negative transition probability")

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]

    def dense(self) -> np.ndarray:
        P = self.transition
        return P.toarray() if sparse.issparse(P) else np.asarray(P)

    def row(self, i: int) -> tuple[list[int], list[float]]:
        """Nonzero columns of row ``i`` with cumulative probabilities."""
        if self._rows is None:
            object.__setattr__(self, "_rows", [None] * self.n_states)
        cached = self._rows[i]
        if cached is None:
            P = self.transition
            if sparse.issparse(P):
                lo, hi = P.indptr[i], P.indptr[i + 1]
                cols, vals = P.indices[lo:hi], P.data[lo:hi]
            else:
                cols = np.flatnonzero(P[i])
                vals = P[i, cols]
            order = np.argsort(cols)
            cached = (cols[order].tolist(), np.cumsum(vals[order]).tolist())
            self._rows[i] = cached
        return cached

    def stationarity_error(self, pi: np.ndarray | None = None) -> float:
        """``max |pi P - pi|`` for the given (default: target) distribution."""
        pi = self.target if pi is None else pi
        return float(np.abs(self.transition.T @ pi - pi).max())

    def detailed_balance_error(self) -> float:
        P = self.dense()
        flow = self.target[:, None] * P
        return float(np.abs(flow - flow.T).max())


def build_chain(q, pi, rule: str = "metropolis") -> MarkovChain:
    """Hastings chain for target ``pi`` from proposal matrix ``q``."""
    try:
        accept = RULES[rule]
    except KeyError:
        raise ValueError(f"rule must be one of {sorted(RULES)}") from None
    q = np.asarray(q, dtype=np.float64)
    pi = np.asarray(pi, dtype=np.float64)
    n = len(pi)
    if q.shape != (n, n):
        raise ValueError("proposal and target sizes differ")
    if np.any(pi <= 0):
        raise ValueError("target must be strictly positive")
    if np.any(np.abs(q.sum(axis=1) - 1) > ROW_TOL) or np.any(q < 0):
        raise ValueError("proposal must be row-stochastic")
    P = np.zeros((n, n))
    for i in range(n):
        for j in np.flatnonzero(q[i]):
            if j != i:
                P[i, j] = q[i, j] * accept(pi[i], pi[j])
        stay = 1.0 - P[i].sum()
        assert stay >= -ROW_TOL, f"negative holding probability in row {i}"
        P[i, i] = max(stay, 0.0)
    return MarkovChain(P, pi / pi.sum())


def poisson_target(lam: float, n_states: int) -> np.ndarray:
    """Poisson(lam) pmf on ``0..n_states-1``, renormalized after truncation."""
    i = np.arange(n_states)
    logp = i * math.log(lam) - lam - np.array([math.lgamma(k + 1) for k in i])
    p = np.exp(logp)
    return p / p.sum()


def birth_death_proposal(n_states: int) -> np.ndarray:
    """Nearest-neighbor proposal: 1/2 up, 1/2 down; state 0 holds or moves up.

    At the truncation boundary the upward half stays put.
    """
    q = np.zeros((n_states, n_states))
    q[0, 0] = 0.5
    q[0, 1] = 0.5
    for i in range(1, n_states):
        q[i, i - 1] = 0.5
        if i + 1 < n_states:
            q[i, i + 1] = 0.5
        else:
            q[i, i] += 0.5
    return q


def stationary_distribution(chain: MarkovChain, start: np.ndarray | None = None,
                            tol: float = 1e-13, max_iter: int = 1_000_000) -> np.ndarray:
    """Power iteration ``pi <- pi P`` until the L1 change drops below ``tol``."""
    n = chain.n_states
    pi = np.full(n, 1.0 / n) if start is None else np.asarray(start, dtype=np.float64)
    PT = chain.transition.T
    for _ in range(max_iter):
        nxt = PT @ pi
        nxt /= nxt.sum()
        if np.abs(nxt - pi).sum() < tol:
            return nxt
        pi = nxt
    raise RuntimeError("power iteration did not converge")


def bias_exponent(gamma: float) -> float:
    return 1.0 / (gamma - 1.0)


def degree_bias_matrix(g: Graph, gamma: float) -> MarkovChain:
    """Degree- and id-biased walk on ``g``.

    Off-diagonal ``p_ij = (1/k_i) min((1/j)**(1/(gamma-1)) * k_i/k_j, 1)``
    for edges. The diagonal is taken literally as ``1 - (1/k_i) sum_{l~i} p_li``;
    since that does not make rows stochastic in general, rows are rescaled
    afterwards and the largest pre-scaling deviation is kept in
    ``residual``.
    """
    comps = connected_components(g)
    if len(comps) > 1:
        raise DisconnectedGraphError(comps)
    n = g.n_nodes
    if n > EXPLICIT_LIMIT:
        raise ValueError(f"{n} states exceeds the explicit-matrix limit {EXPLICIT_LIMIT}; "
                         "use bias_row() for on-the-fly rows")
    if n == 1:
        return MarkovChain(np.ones((1, 1)), np.ones(1))
    deg = g.degrees()
    e = bias_exponent(gamma)
    rows, cols, vals = [], [], []
    incoming = np.zeros(n + 1)
    for i in g.nodes():
        ki = deg[i - 1]
        for j in g.neighbors(i):
            v = min((1.0 / j) ** e * ki / deg[j - 1], 1.0) / ki
            rows.append(i - 1)
            cols.append(j - 1)
            vals.append(v)
            incoming[j] += v
    off = sparse.csr_array((vals, (rows, cols)), shape=(n, n))
    off_sum = np.asarray(off.sum(axis=1)).ravel()
    diag = 1.0 - incoming[1:] / deg
    total = off_sum + diag
    residual = float(np.abs(total - 1.0).max())
    if residual > ROW_TOL:
        log.info("bias matrix rows off by up to %.3g before rescaling", residual)
    P = (off + sparse.diags_array(diag)).tocsr()
    P = sparse.csr_array(sparse.diags_array(1.0 / total) @ P)
    chain = MarkovChain(P, None, residual)
    pi = stationary_distribution(chain)
    return MarkovChain(P, pi, residual)


def bias_row(g: Graph, gamma: float, i: int) -> dict[int, float]:
    """Row ``i`` of :func:`degree_bias_matrix` computed from the graph alone."""
    e = bias_exponent(gamma)
    ki = g.degree(i)
    if ki == 0:
        raise ValueError(f"node {i} is isolated")
    out = {}
    for j in g.neighbors(i):
        out[j] = min((1.0 / j) ** e * ki / g.degree(j), 1.0) / ki
    diag = 1.0 - sum(min((1.0 / i) ** e * g.degree(l) / ki, 1.0) / g.degree(l)
                     for l in g.neighbors(i)) / ki
    out[i] = diag
    total = sum(out.values())
    return {j: v / total for j, v in sorted(out.items())}


def walk_step(chain: MarkovChain, state: int, rng: random.Random) -> int:
    cols, cum = chain.row(state)
    u = rng.random() * cum[-1]
    return cols[min(bisect.bisect_right(cum, u), len(cols) - 1)]


def occupancy(chain: MarkovChain, start: int, n_steps: int, rng: random.Random) -> np.ndarray:
    """Visit frequencies of the states over ``n_steps`` walk steps."""
    counts = np.zeros(chain.n_states, dtype=np.int64)
    rows = [chain.row(i) for i in range(chain.n_states)]
    state = start
    rand = rng.random
    bis = bisect.bisect_right
    for _ in range(n_steps):
        cols, cum = rows[state]
        k = bis(cum, rand() * cum[-1])
        state = cols[k if k < len(cols) else -1]
        counts[state] += 1
    return counts / n_steps
