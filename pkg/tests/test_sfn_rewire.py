import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sfcluster.centralized import distance_to_target
from sfcluster.graph import from_edges
from sfcluster.sfn_rewire import (
    RewireWalkConfig,
    bias_exponent,
    bias_step,
    biased_walk,
    build_distributed,
    initial_graph,
    matched_edge_count,
    move_ratio,
    random_graph,
    rewire_all,
    rewire_all_with_stats,
    ring_lattice,
)
from strategies import graphs


def test_exponent_groupings():
    assert bias_exponent(RewireWalkConfig()) == pytest.approx(1 / (2 / 3 * 2.5 - 1))
    cfg = RewireWalkConfig(exponent_grouping="gamma_minus_1")
    assert bias_exponent(cfg) == pytest.approx(1 / 1.5)
    with pytest.raises(ValueError):
        RewireWalkConfig(exponent_grouping="other")
    with pytest.raises(ValueError):
        RewireWalkConfig(walk_length=0)


def _lopsided():
    # node 1 has degree 3, its neighbour 2 has degree 10
    edges = [(1, 2), (1, 3), (1, 4)] + [(2, k) for k in range(5, 14)]
    return from_edges(13, edges).freeze()


def test_move_ratio():
    g = _lopsided()
    assert move_ratio(1, 2, g, 0.0) == pytest.approx(0.3)
    assert move_ratio(1, 2, g, 1.0) == pytest.approx(0.15)


def test_bias_step_is_bernoulli():
    g = _lopsided()
    # huge gamma makes the id factor ~1, leaving h = 3/10
    cfg = RewireWalkConfig(gamma=1e6, exponent_grouping="gamma_minus_1")
    rng = random.Random(11)
    n = 20_000
    moved = sum(bias_step(1, 2, g, cfg, rng) == 2 for _ in range(n))
    assert moved / n == pytest.approx(0.3, abs=0.02)


def test_walk_always_moves_downhill():
    g = from_edges(3, [(1, 2), (2, 3)]).freeze()
    # from the centre (degree 2) to a leaf, h >= 2 * (2/3)**x > 1 for small x
    assert biased_walk(g, 2, 1, 0.0, random.Random(0)) in (1, 3)


def test_walk_stuck_on_isolated_node():
    with pytest.raises(ValueError):
        biased_walk(from_edges(3, [(1, 2)]), 3, 2, 1.0, random.Random(0))


def test_initial_graphs():
    assert matched_edge_count(1000, 2.5) == 974
    assert matched_edge_count(2, 2.5) == 1
    g = initial_graph(1000, 2.5, 1)
    assert g.n_edges == 974
    r = ring_lattice(10, 2, None)
    assert set(r.degrees().tolist()) == {4}
    assert initial_graph(50, 2.5, 0, "ring-chords", m=2).n_edges == 100
    with pytest.raises(ValueError):
        initial_graph(50, 2.5, 0, "tree")


def test_deterministic():
    g = random_graph(300, 300, 4)
    cfg = RewireWalkConfig(seed=2)
    assert rewire_all(g, cfg).edges == rewire_all(g, cfg).edges


def test_nothing_to_rewire():
    with pytest.raises(ValueError):
        rewire_all(from_edges(3, []), RewireWalkConfig())


def test_single_edge_is_skipped():
    g = from_edges(2, [(1, 2)])
    h, stats = rewire_all_with_stats(g, RewireWalkConfig())
    assert h.edges == [(1, 2)]
    assert stats.n_skipped == 1 and stats.processed == 1


@settings(max_examples=40, deadline=None)
@given(graphs(min_nodes=3, max_nodes=25, connected=True), st.integers(0, 10**6),
       st.integers(1, 12))
def test_edge_count_conserved(g, seed, L):
    h, stats = rewire_all_with_stats(g, RewireWalkConfig(walk_length=L, seed=seed))
    assert h.n_edges == g.n_edges
    assert stats.processed == g.n_edges
    assert all(i != j for i, j in h.edges)
    assert len(set(h.edges)) == h.n_edges


@pytest.mark.slow
def test_rewiring_improves_fit():
    g0 = initial_graph(3000, 2.5, 0x5EED)
    g, _ = build_distributed(3000, RewireWalkConfig(seed=0))
    assert distance_to_target(g, 2.5) < distance_to_target(g0, 2.5) - 0.05
