"""Centralized construction: probabilistic link creation, then nearest-core clustering.

A master draws node pairs uniformly and keeps the link ``i-j`` with
probability ``1 - exp(-2 N p_i p_j)`` where ``p_i`` is a normalized
``i**-alpha`` weight. Once built, every server node joins the cluster of the
core at minimum hop distance.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from sfcluster.graph import (
    DEFAULT_D_MAX,
    CorePartition,
    Graph,
    bfs_tree,
    empirical_degree_distribution,
)
from sfcluster.metrics import trace_distance
from sfcluster.powerlaw import PowerLawParams, theoretical_distribution

log = logging.getLogger(__name__)

ALPHA_CONVENTIONS = ("goh", "as_written")
TIE_BREAKS = ("random", "lowest_id")


class RewireTimeoutError(RuntimeError):
    def __init__(self, message: str, best_distance: float, iterations: int):
        super().__init__(message)
        self.best_distance = best_distance
        self.iterations = iterations


class NoCoresError(ValueError):
    """The threshold leaves no core node to cluster around."""

    def __init__(self, threshold: int, max_degree: int):
        super().__init__(f"threshold T={threshold} yields no core nodes "
                         f"(maximum degree is {max_degree})")
        self.threshold = threshold
        self.max_degree = max_degree


def alpha_from_gamma(gamma: float, convention: str = "goh") -> float:
    """Weight exponent for a target degree exponent.

    ``goh`` inverts ``gamma = (1 + alpha) / alpha``; ``as_written`` is the
    literal ``1 / (1 - gamma)``, which is negative for ``gamma > 1``.
    """
    if convention == "goh":
        return 1.0 / (gamma - 1.0)
    if convention == "as_written":
        return 1.0 / (1.0 - gamma)
    raise ValueError(f"unknown alpha convention {convention!r}; use one of {ALPHA_CONVENTIONS}")


def node_weight(i: int, alpha: float) -> float:
    """``i**-alpha`` over the partial sum ``sum_{m=1}^{i} m**-alpha``."""
    if i < 1:
        raise ValueError("node ids start at 1")
    return i ** -alpha / math.fsum(m ** -alpha for m in range(1, i + 1))


def node_weights(n_nodes: int, alpha: float) -> np.ndarray:
    """Vector of :func:`node_weight` for ids ``1..n_nodes`` (index ``i - 1``)."""
    w = np.arange(1, n_nodes + 1, dtype=np.float64) ** -alpha
    return w / np.cumsum(w)


def link_probability(p_i: float, p_j: float, n_nodes: int) -> float:
    return 1.0 - math.exp(-2.0 * n_nodes * p_i * p_j)


@dataclass(frozen=True)
class RewireConfig:
    """Parameters of one centralized build.

    Exactly one stopping rule must be given: ``fixed_iterations`` (number
    of links recorded) or ``epsilon`` (target trace distance, checked every
    ``check_interval`` links, default ``N // 10``).
    """

    n_nodes: int
    gamma: float = 2.5
    fixed_iterations: int | None = None
    epsilon: float | None = None
    check_interval: int | None = None
    seed: int = 0
    alpha_convention: str = "goh"
    max_iterations: int | None = None

    def __post_init__(self):
        if self.n_nodes < 2:
            raise ValueError("need at least two nodes")
        if (self.fixed_iterations is None) == (self.epsilon is None):
            raise ValueError("give exactly one of fixed_iterations or epsilon")
        if self.fixed_iterations is not None and self.fixed_iterations < 0:
            raise ValueError("fixed_iterations must be >= 0")
        if self.epsilon is not None and not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        if self.alpha_convention not in ALPHA_CONVENTIONS:
            raise ValueError(f"alpha_convention must be one of {ALPHA_CONVENTIONS}")

    @property
    def alpha(self) -> float:
        return alpha_from_gamma(self.gamma, self.alpha_convention)

    @property
    def interval(self) -> int:
        return self.check_interval or max(1, self.n_nodes // 10)

    @property
    def iteration_cap(self) -> int:
        return self.max_iterations or 100 * self.n_nodes


def iterations_for(multiple: float, n_nodes: int) -> int:
    """Iteration budget expressed as a multiple of N (``1.4`` -> ``round(1.4 * N)``)."""
    return int(round(multiple * n_nodes))


def _grow(config: RewireConfig, g: Graph) -> Iterator[int]:
    """Record links into ``g``; yields the link count after each new link.

    Self-pairs and already-present links are redrawn without counting as an
    iteration. Stops silently once the graph is complete.
    """
    rng = random.Random(config.seed)
    n = config.n_nodes
    p = [0.0] + node_weights(n, config.alpha).tolist()
    two_n = 2.0 * n
    complete = n * (n - 1) // 2
    rand = rng.random
    exp = math.exp
    while g.n_edges < complete:
        i = int(rand() * n) + 1
        j = int(rand() * n) + 1
        if i == j:
            continue
        kappa = rand()
        if 1.0 - exp(-two_n * p[i] * p[j]) > kappa and g.add_edge(i, j):
            yield g.n_edges


def distance_to_target(g: Graph, gamma: float) -> float:
    emp = empirical_degree_distribution(g)
    theory = theoretical_distribution(PowerLawParams(gamma), max(emp.support_max, 1))
    return trace_distance(emp, theory)


def rewire(config: RewireConfig,
           observer: Callable[[int, Graph], None] | None = None) -> Graph:
    """Build the overlay from an empty link table; returns a frozen graph.

    ``observer(iteration, graph)`` is called at every stopping-rule check
    (every link under the fixed rule would be wasteful, so it is only called
    at the ``check_interval`` cadence).
    """
    g = Graph(config.n_nodes, {"gamma": repr(float(config.gamma)), "seed": str(config.seed)})
    if config.fixed_iterations is not None:
        target = config.fixed_iterations
        if target > 0:
            for it in _grow(config, g):
                if observer and it % config.interval == 0:
                    observer(it, g)
                if it >= target:
                    break
        if g.n_edges < target:
            log.warning("graph saturated after %d links (budget %d)", g.n_edges, target)
        return g.freeze()

    best = math.inf
    cap = config.iteration_cap
    it = 0
    for it in _grow(config, g):
        if it % config.interval == 0:
            d = distance_to_target(g, config.gamma)
            best = min(best, d)
            if observer:
                observer(it, g)
            log.debug("iteration %d: trace distance %.4f", it, d)
            if d <= config.epsilon:
                return g.freeze()
        if it >= cap:
            break
    d = distance_to_target(g, config.gamma)
    best = min(best, d)
    if d <= config.epsilon:
        return g.freeze()
    raise RewireTimeoutError(
        f"trace distance never reached epsilon={config.epsilon} within {it} links "
        f"(best {best:.4f})", best, it)


def distance_curve(config: RewireConfig, checkpoints) -> list[tuple[int, int, float]]:
    """Trace distance after each link count in ``checkpoints``.

    One run with the config's seed is shared by all checkpoints, so the
    curve is exactly what separate fixed-budget runs would give.
    Returns ``(iterations, n_edges, distance)`` rows.
    """
    marks = sorted(set(int(c) for c in checkpoints))
    rows = []
    g = Graph(config.n_nodes)
    todo = iter(marks)
    nxt = next(todo, None)
    while nxt == 0:
        rows.append((0, 0, distance_to_target(g, config.gamma)))
        nxt = next(todo, None)
    if nxt is not None:
        for it in _grow(config, g):
            while nxt is not None and it >= nxt:
                rows.append((nxt, g.n_edges, distance_to_target(g, config.gamma)))
                nxt = next(todo, None)
            if nxt is None:
                break
    while nxt is not None:  # saturated before the largest checkpoint
        rows.append((nxt, g.n_edges, distance_to_target(g, config.gamma)))
        nxt = next(todo, None)
    return rows


# -- clustering ---------------------------------------------------------------


@dataclass(frozen=True)
class Assignment:
    core: int
    hops: int
    path: tuple[int, ...]  # intermediate nodes from the core to the server, both excluded


@dataclass
class ClusterAssignment:
    assignments: dict[int, Assignment]
    members: dict[int, list[int]]
    unassigned: list[int] = field(default_factory=list)

    def cluster_sizes(self) -> list[int]:
        return [len(self.members[c]) for c in sorted(self.members)]

    def core_of(self) -> dict[int, tuple[int, int]]:
        """``server -> (core, hops)``, the part two clusterings are compared on."""
        return {s: (a.core, a.hops) for s, a in self.assignments.items()}


def assign_clusters(g: Graph, part: CorePartition, d_max: int = DEFAULT_D_MAX,
                    seed: int | None = None, tie_break: str = "random") -> ClusterAssignment:
    """Attach every server to a core at minimum BFS distance (at most ``d_max``).

    Ties go to a uniformly random minimal core (``tie_break="random"``) or
    to the lowest core id (``"lowest_id"``). Servers with no core within
    ``d_max`` hops end up in ``unassigned``.
    """
    if tie_break not in TIE_BREAKS:
        raise ValueError(f"tie_break must be one of {TIE_BREAKS}")
    if part.n_cores == 0:
        raise NoCoresError(part.threshold, int(g.degrees().max(initial=0)))
    rng = random.Random(seed)

    best: dict[int, tuple[int, list[int]]] = {}
    trees = {}
    for c in part.core_ids:
        dist, parent = bfs_tree(g, c, d_max)
        trees[c] = parent
        for v, d in dist.items():
            if part.is_core(v):
                continue
            cur = best.get(v)
            if cur is None or d < cur[0]:
                best[v] = (d, [c])
            elif d == cur[0]:
                cur[1].append(c)

    assignments: dict[int, Assignment] = {}
    members: dict[int, list[int]] = {c: [] for c in part.core_ids}
    unassigned = []
    for s in part.server_ids:
        if s not in best:
            unassigned.append(s)
            continue
        d, cores = best[s]
        core = min(cores) if tie_break == "lowest_id" or len(cores) == 1 else rng.choice(sorted(cores))
        assignments[s] = Assignment(core, d, _path(trees[core], core, s))
        members[core].append(s)
    return ClusterAssignment(assignments, members, unassigned)


def _path(parent: dict[int, int], root: int, node: int) -> tuple[int, ...]:
    out = []
    u = parent[node]
    while u != root:
        out.append(u)
        u = parent[u]
    return tuple(reversed(out))
