"""Undirected simple graph on node ids ``1..N`` plus core partition, BFS and I/O.

The edge list is kept in insertion order (the ``Links`` table of the
builders) and adjacency lists support O(1) removal, which the walk-based
rewiring needs.
"""

from __future__ import annotations

import os
import re
from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from sfcluster.powerlaw import DegreeDistribution


DEFAULT_D_MAX = 10


class FrozenGraphError(RuntimeError):
    pass


def _key(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


class Graph:
    """Simple undirected graph; node ids are exactly ``1..n_nodes``."""

    def __init__(self, n_nodes: int, meta: dict[str, str] | None = None):
        if n_nodes < 1:
            raise ValueError("a graph needs at least one node")
        self.n_nodes = int(n_nodes)
        self.meta: dict[str, str] = dict(meta or {})
        self._edges: dict[tuple[int, int], None] = {}
        self._adj: list[list[int]] = [[] for _ in range(self.n_nodes + 1)]
        self._pos: list[dict[int, int]] = [{} for _ in range(self.n_nodes + 1)]
        self._frozen = False

    # -- construction -------------------------------------------------------

    def _check_node(self, i: int) -> None:
        if not 1 <= i <= self.n_nodes:
            raise ValueError(f"node id {i} outside 1..{self.n_nodes}")

    def _check_mutable(self) -> None:
        if self._frozen:
            raise FrozenGraphError("graph is frozen")

    def add_edge(self, i: int, j: int) -> bool:
        """Add edge ``i-j``; returns False (and changes nothing) if it already exists."""
        self._check_mutable()
        self._check_node(i)
        self._check_node(j)
        if i == j:
            raise ValueError(f"self-loop on node {i}")
        key = _key(i, j)
        if key in self._edges:
            return False
        self._edges[key] = None
        for a, b in ((i, j), (j, i)):
            self._pos[a][b] = len(self._adj[a])
            self._adj[a].append(b)
        return True

    def remove_edge(self, i: int, j: int) -> None:
        self._check_mutable()
        key = _key(i, j)
        if key not in self._edges:
            raise KeyError(f"no edge {i}-{j}")
        del self._edges[key]
        for a, b in ((i, j), (j, i)):
            adj, pos = self._adj[a], self._pos[a]
            idx = pos.pop(b)
            last = adj.pop()
            if last != b:
                adj[idx] = last
                pos[last] = idx

    def freeze(self) -> Graph:
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    def copy(self) -> Graph:
        g = Graph(self.n_nodes, self.meta)
        for i, j in self._edges:
            g.add_edge(i, j)
        return g

    # -- queries ------------------------------------------------------------

    def has_edge(self, i: int, j: int) -> bool:
        return _key(i, j) in self._edges

    def degree(self, i: int) -> int:
        return len(self._adj[i])

    def degrees(self) -> np.ndarray:
        """Degree vector for nodes ``1..N`` (index ``i - 1``)."""
        return np.fromiter((len(a) for a in self._adj[1:]), dtype=np.int64,
                           count=self.n_nodes)

    def neighbors(self, i: int) -> list[int]:
        """Adjacency list of ``i``; order depends on the edit history. Do not mutate."""
        return self._adj[i]

    @property
    def edges(self) -> list[tuple[int, int]]:
        return list(self._edges)

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    def nodes(self) -> range:
        return range(1, self.n_nodes + 1)

    def __repr__(self) -> str:
        return f"Graph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"


def from_edges(n_nodes: int, edges, meta: dict[str, str] | None = None) -> Graph:
    g = Graph(n_nodes, meta)
    for i, j in edges:
        g.add_edge(int(i), int(j))
    return g


@dataclass(frozen=True)
class CorePartition:
    threshold: int
    core_ids: tuple[int, ...]
    server_ids: tuple[int, ...]

    @property
    def n_cores(self) -> int:
        return len(self.core_ids)

    @cached_property
    def core_set(self) -> frozenset[int]:
        return frozenset(self.core_ids)

    def is_core(self, i: int) -> bool:
        return i in self.core_set


def partition(g: Graph, threshold: int) -> CorePartition:
    """Nodes of degree >= threshold are cores, the rest servers."""
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    deg = g.degrees()
    ids = np.arange(1, g.n_nodes + 1)
    mask = deg >= threshold
    return CorePartition(int(threshold), tuple(ids[mask].tolist()), tuple(ids[~mask].tolist()))


def bfs_distances(g: Graph, source: int, d_max: int = DEFAULT_D_MAX) -> dict[int, int]:
    """Hop counts from ``source`` to every node within ``d_max`` hops (source excluded)."""
    dist, _ = bfs_tree(g, source, d_max)
    del dist[source]
    return dist


def bfs_tree(g: Graph, source: int, d_max: int = DEFAULT_D_MAX
             ) -> tuple[dict[int, int], dict[int, int]]:
    """Distances and BFS parent pointers from ``source``, truncated at ``d_max``.

    Neighbors are expanded in ascending id order so the tree is independent
    of adjacency-list history.
    """
    g._check_node(source)
    dist = {source: 0}
    parent: dict[int, int] = {}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = dist[u]
        if du == d_max:
            continue
        for v in sorted(g.neighbors(u)):
            if v not in dist:
                dist[v] = du + 1
                parent[v] = u
                queue.append(v)
    return dist, parent


def connected_components(g: Graph) -> list[list[int]]:
    seen = [False] * (g.n_nodes + 1)
    comps = []
    for s in g.nodes():
        if seen[s]:
            continue
        seen[s] = True
        comp, stack = [s], [s]
        while stack:
            u = stack.pop()
            for v in g.neighbors(u):
                if not seen[v]:
                    seen[v] = True
                    comp.append(v)
                    stack.append(v)
        comps.append(sorted(comp))
    return comps


def empirical_degree_distribution(g: Graph) -> DegreeDistribution:
    """Fraction of all N nodes having each degree k >= 1.

    Isolated nodes count toward N but not toward any k, so the result sums
    to less than one when they exist.
    """
    deg = g.degrees()
    kmax = int(deg.max()) if deg.size else 0
    counts = np.bincount(deg, minlength=kmax + 1)
    return DegreeDistribution(counts[1:] / g.n_nodes)


# -- edge-list files ---------------------------------------------------------

_HEADER = re.compile(r"^# nodes=(\d+) gamma=(\S+) seed=(\S+)$")


def write_edge_list(g: Graph, path: str | os.PathLike, gamma=None, seed=None) -> None:
    """Write ``# nodes=N gamma=G seed=S`` followed by one ``i,j`` line per edge.

    ``gamma``/``seed`` default to the values recorded in ``g.meta`` so a
    file read back and written again is byte-identical.
    """
    gamma = g.meta.get("gamma", "NA") if gamma is None else _fmt(gamma)
    seed = g.meta.get("seed", "NA") if seed is None else _fmt(seed)
    lines = [f"# nodes={g.n_nodes} gamma={gamma} seed={seed}"]
    lines.extend(f"{i},{j}" for i, j in g.edges)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_edge_list(path: str | os.PathLike) -> Graph:
    with open(path) as fh:
        header = fh.readline().rstrip("\n")
        m = _HEADER.match(header)
        if not m:
            raise ValueError(f"{path}: bad header {header!r}")
        g = Graph(int(m.group(1)), {"gamma": m.group(2), "seed": m.group(3)})
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                i, j = (int(x) for x in line.split(","))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: expected 'i,j', got {line!r}") from None
            if not g.add_edge(i, j):
                raise ValueError(f"{path}:{lineno}: duplicate edge {i},{j}")
    return g.freeze()


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)
