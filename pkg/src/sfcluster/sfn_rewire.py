"""Walk-based rewiring: every edge of an existing overlay is replaced by one
whose endpoints are picked by two consecutive L-hop biased random walks.

Walk moves use ``h = (d_a / d_b) * (a / b) ** x``: a uniformly chosen
neighbor ``b`` is taken when ``h`` beats a uniform draw, otherwise the walk
stays at ``a`` for that hop. The exponent ``x`` depends on
``exponent_grouping`` (see :func:`bias_exponent`).
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass

from sfcluster.centralized import alpha_from_gamma
from sfcluster.graph import Graph
from sfcluster.powerlaw import PowerLawParams, mean_degree

log = logging.getLogger(__name__)

GROUPINGS = ("alpha_times_gamma_minus_1", "gamma_minus_1")
TOPOLOGIES = ("matched-random", "ring-lattice", "ring-chords")


@dataclass(frozen=True)
class RewireWalkConfig:
    walk_length: int = 10
    gamma: float = 2.5
    alpha: float | None = None
    seed: int = 0
    exponent_grouping: str = "alpha_times_gamma_minus_1"
    max_retries: int = 16

    def __post_init__(self):
        if self.walk_length < 1:
            raise ValueError("walk_length must be >= 1")
        if self.exponent_grouping not in GROUPINGS:
            raise ValueError(f"exponent_grouping must be one of {GROUPINGS}")

    @property
    def effective_alpha(self) -> float:
        return alpha_from_gamma(self.gamma) if self.alpha is None else self.alpha


def bias_exponent(config: RewireWalkConfig) -> float:
    """``1/(alpha*gamma - 1)`` (default grouping) or ``1/(gamma - 1)`` as in the bias matrix."""
    if config.exponent_grouping == "alpha_times_gamma_minus_1":
        denom = config.effective_alpha * config.gamma - 1.0
    else:
        denom = config.gamma - 1.0
    if denom == 0:
        raise ValueError("bias exponent undefined (zero denominator)")
    return 1.0 / denom


def move_ratio(a: int, b: int, g: Graph, exponent: float) -> float:
    return g.degree(a) / g.degree(b) * (a / b) ** exponent


def bias_step(current: int, candidate: int, g: Graph, config: RewireWalkConfig,
              rng: random.Random) -> int:
    """One hop decision: returns ``candidate`` if ``h > kappa`` else ``current``."""
    if g.degree(current) == 0:
        raise ValueError(f"walk stuck on isolated node {current}")
    kappa = rng.random()
    return candidate if move_ratio(current, candidate, g, bias_exponent(config)) > kappa else current


def biased_walk(g: Graph, start: int, length: int, exponent: float, rng: random.Random) -> int:
    """Run ``length`` hops from ``start``; a rejected move still counts as a hop."""
    a = start
    adj = g.neighbors
    deg = g.degree
    for _ in range(length):
        kappa = rng.random()
        nb = adj(a)
        if not nb:
            raise ValueError(f"walk stuck on isolated node {a}")
        b = nb[int(rng.random() * len(nb))]
        if deg(a) / deg(b) * (a / b) ** exponent > kappa:
            a = b
    return a


@dataclass
class RewireStats:
    original_edges: int
    n_rewired: int = 0
    n_skipped: int = 0
    node_draws: int = 0

    @property
    def processed(self) -> int:
        return self.n_rewired + self.n_skipped


class _PendingEdges:
    """Per-node sets of original edges not yet processed, with O(1) random pick."""

    def __init__(self, g: Graph):
        self.lists: list[list[tuple[int, int]]] = [[] for _ in range(g.n_nodes + 1)]
        self.pos: list[dict[tuple[int, int], int]] = [{} for _ in range(g.n_nodes + 1)]
        self.remaining = 0
        for e in g.edges:
            for v in e:
                self.pos[v][e] = len(self.lists[v])
                self.lists[v].append(e)
            self.remaining += 1

    def discard(self, e: tuple[int, int]) -> None:
        for v in e:
            lst, pos = self.lists[v], self.pos[v]
            idx = pos.pop(e)
            last = lst.pop()
            if last != e:
                lst[idx] = last
                pos[last] = idx
        self.remaining -= 1


def rewire_all(g: Graph, config: RewireWalkConfig) -> Graph:
    """Rewire every edge of ``g`` once; returns a new frozen graph."""
    out, _ = rewire_all_with_stats(g, config)
    return out


def rewire_all_with_stats(g: Graph, config: RewireWalkConfig) -> tuple[Graph, RewireStats]:
    if g.n_edges == 0:
        raise ValueError("graph has no edges to rewire")
    rng = random.Random(config.seed)
    x = bias_exponent(config)
    L = config.walk_length
    h = g.copy()
    h.meta.update({"gamma": repr(float(config.gamma)), "seed": str(config.seed)})
    pending = _PendingEdges(h)
    stats = RewireStats(original_edges=g.n_edges)
    n = h.n_nodes
    while pending.remaining:
        a = int(rng.random() * n) + 1
        stats.node_draws += 1
        mine = pending.lists[a]
        if not mine:
            continue
        u, v = mine[int(rng.random() * len(mine))]
        du, dv = h.degree(u), h.degree(v)
        start = u if du > dv else v if dv > du else (u if rng.random() < 0.5 else v)
        c = biased_walk(h, start, L, x, rng)
        for _ in range(config.max_retries):
            d = biased_walk(h, c, L, x, rng)
            if d != c and not h.has_edge(c, d):
                break
        else:
            d = None
        pending.discard((u, v))
        if d is None:
            stats.n_skipped += 1
            log.debug("edge %d-%d left in place after %d failed walks", u, v, config.max_retries)
            continue
        h.add_edge(c, d)
        h.remove_edge(u, v)
        stats.n_rewired += 1
    if stats.n_skipped:
        log.info("%d of %d edges could not be rewired", stats.n_skipped, stats.original_edges)
    assert h.n_edges == g.n_edges
    return h.freeze(), stats


# -- initial overlays ---------------------------------------------------------


def matched_edge_count(n_nodes: int, gamma: float) -> int:
    """Edge count whose mean degree equals the target power law's mean degree."""
    m = int(round(n_nodes * mean_degree(PowerLawParams(gamma)) / 2))
    return min(max(1, m), n_nodes * (n_nodes - 1) // 2)


def random_graph(n_nodes: int, n_edges: int, seed: int) -> Graph:
    """Uniform random simple graph with exactly ``n_edges`` edges."""
    if n_edges > n_nodes * (n_nodes - 1) // 2:
        raise ValueError("too many edges for a simple graph")
    rng = random.Random(seed)
    g = Graph(n_nodes)
    while g.n_edges < n_edges:
        i = int(rng.random() * n_nodes) + 1
        j = int(rng.random() * n_nodes) + 1
        if i != j:
            g.add_edge(i, j)
    return g


def ring_lattice(n_nodes: int, m: int, seed: int | None) -> Graph:
    """2m-regular ring lattice; with a seed the ids are placed in random ring order."""
    if n_nodes <= 2 * m:
        raise ValueError("ring lattice needs n_nodes > 2m")
    order = list(range(1, n_nodes + 1))
    if seed is not None:
        random.Random(seed).shuffle(order)
    g = Graph(n_nodes)
    for x in range(n_nodes):
        for s in range(1, m + 1):
            g.add_edge(order[x], order[(x + s) % n_nodes])
    return g


def ring_with_chords(n_nodes: int, n_chords: int, seed: int) -> Graph:
    """Cycle ``1-2-...-N-1`` plus ``n_chords`` uniform random extra edges."""
    g = ring_lattice(n_nodes, 1, None)
    rng = random.Random(seed)
    target = n_nodes + n_chords
    while g.n_edges < target:
        i = int(rng.random() * n_nodes) + 1
        j = int(rng.random() * n_nodes) + 1
        if i != j:
            g.add_edge(i, j)
    return g


def initial_graph(n_nodes: int, gamma: float, seed: int, topology: str = "matched-random",
                  m: int = 2) -> Graph:
    """Starting overlay for :func:`rewire_all`.

    ``matched-random`` is a uniform random graph whose edge count matches
    the target mean degree, which matters because rewiring conserves edges.
    ``ring-lattice`` is a shuffled 2m-regular ring; ``ring-chords`` a cycle
    plus ``(m - 1) * N`` random chords.
    """
    if topology == "matched-random":
        return random_graph(n_nodes, matched_edge_count(n_nodes, gamma), seed)
    if topology == "ring-lattice":
        return ring_lattice(n_nodes, m, seed)
    if topology == "ring-chords":
        return ring_with_chords(n_nodes, (m - 1) * n_nodes, seed)
    raise ValueError(f"topology must be one of {TOPOLOGIES}")


def build_distributed(n_nodes: int, config: RewireWalkConfig, topology: str = "matched-random",
                      m: int = 2) -> tuple[Graph, RewireStats]:
    # Offset keeps the initial-topology stream independent of the walk stream.
    g0 = initial_graph(n_nodes, config.gamma, config.seed + 0x5EED, topology, m)
    return rewire_all_with_stats(g0, config)
