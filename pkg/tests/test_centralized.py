import logging
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sfcluster.centralized import (
    NoCoresError,
    RewireConfig,
    RewireTimeoutError,
    alpha_from_gamma,
    assign_clusters,
    distance_curve,
    distance_to_target,
    iterations_for,
    link_probability,
    node_weight,
    node_weights,
    rewire,
)
from sfcluster.graph import from_edges, partition
from strategies import floyd_warshall, graphs


def test_alpha_conventions():
    assert alpha_from_gamma(2.5) == pytest.approx(2 / 3)
    assert alpha_from_gamma(2.5, "as_written") == pytest.approx(-2 / 3)
    with pytest.raises(ValueError):
        alpha_from_gamma(2.5, "other")


def test_node_weight_hand_value():
    # 2**(-2/3) / (1 + 2**(-2/3))
    assert node_weight(2, 2 / 3) == pytest.approx(0.38648820956430935, rel=1e-12)
    assert node_weight(1, 2 / 3) == 1.0
    with pytest.raises(ValueError):
        node_weight(0, 0.5)


def test_vector_weights_match_scalar():
    w = node_weights(50, 2 / 3)
    for i in (1, 2, 17, 50):
        assert w[i - 1] == pytest.approx(node_weight(i, 2 / 3), rel=1e-12)


def test_link_probability():
    assert link_probability(0.0, 0.5, 100) == 0.0
    assert link_probability(0.5, 0.5, 2) == pytest.approx(1 - math.exp(-1))


def test_iterations_for():
    assert iterations_for(1.4, 1000) == 1400
    assert iterations_for(0, 10) == 0


@pytest.mark.parametrize("kwargs", [
    {},
    {"fixed_iterations": 10, "epsilon": 0.2},
    {"fixed_iterations": -1},
    {"epsilon": 0.0},
    {"fixed_iterations": 1, "alpha_convention": "x"},
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        RewireConfig(100, **kwargs)


def test_fixed_budget_records_exact_link_count():
    g = rewire(RewireConfig(300, fixed_iterations=420, seed=3))
    assert g.n_edges == 420 and g.frozen
    assert g.meta == {"gamma": "2.5", "seed": "3"}


def test_deterministic_per_seed():
    a = rewire(RewireConfig(300, fixed_iterations=400, seed=5))
    b = rewire(RewireConfig(300, fixed_iterations=400, seed=5))
    c = rewire(RewireConfig(300, fixed_iterations=400, seed=6))
    assert a.edges == b.edges
    assert a.edges != c.edges


def test_two_nodes_saturate(caplog):
    with caplog.at_level(logging.WARNING):
        g = rewire(RewireConfig(2, fixed_iterations=3))
    assert g.edges == [(1, 2)]
    assert "saturated" in caplog.text
    assert 0.0 <= distance_to_target(g, 2.5) <= 1.0


def test_epsilon_rule_stops_or_times_out():
    g = rewire(RewireConfig(500, epsilon=0.6, seed=1))
    assert distance_to_target(g, 2.5) <= 0.6
    with pytest.raises(RewireTimeoutError) as info:
        rewire(RewireConfig(200, epsilon=0.01, seed=1, max_iterations=300))
    assert info.value.iterations >= 300 and info.value.best_distance > 0.01


def test_distance_curve_matches_separate_runs():
    cfg = RewireConfig(300, fixed_iterations=1, seed=9)
    rows = distance_curve(cfg, [0, 100, 300])
    assert [r[0] for r in rows] == [0, 100, 300]
    for it, m, d in rows[1:]:
        g = rewire(RewireConfig(300, fixed_iterations=it, seed=9))
        assert m == g.n_edges
        assert d == distance_to_target(g, 2.5)


# -- clustering ----------------------------------------------------------------


def test_star_one_cluster(star):
    ca = assign_clusters(star, partition(star, 2))
    assert ca.members == {1: [2, 3, 4, 5, 6]}
    assert all(a.hops == 1 and a.path == () for a in ca.assignments.values())


def test_no_cores_names_max_degree(star):
    with pytest.raises(NoCoresError, match="maximum degree is 5"):
        assign_clusters(star, partition(star, 9))


def test_paths_are_walkable():
    g = from_edges(7, [(1, 2), (2, 3), (3, 4), (4, 5), (1, 6), (1, 7)]).freeze()
    ca = assign_clusters(g, partition(g, 3))
    a = ca.assignments[5]
    assert (a.core, a.hops, a.path) == (1, 4, (2, 3, 4))


def _tie_graph():
    # server 1 sits between cores 2 and 3, each with three leaves
    edges = [(1, 2), (1, 3)] + [(2, k) for k in (4, 5, 6)] + [(3, k) for k in (7, 8, 9)]
    return from_edges(9, edges).freeze()


def test_random_tie_break_is_fair():
    g = _tie_graph()
    part = partition(g, 4)
    picks = [assign_clusters(g, part, seed=s).assignments[1].core for s in range(1000)]
    share = picks.count(2) / len(picks)
    assert 0.4 <= share <= 0.6


def test_lowest_id_tie_break():
    g = _tie_graph()
    ca = assign_clusters(g, partition(g, 4), tie_break="lowest_id")
    assert ca.assignments[1].core == 2


@settings(max_examples=100, deadline=None)
@given(graphs(min_nodes=2, max_nodes=30), st.integers(1, 5), st.integers(1, 6),
       st.sampled_from(["random", "lowest_id"]))
def test_assignment_matches_brute_force(g, T, d_max, tie_break):
    part = partition(g, T)
    if part.n_cores == 0:
        return
    fw = floyd_warshall(g)
    ca = assign_clusters(g, part, d_max=d_max, seed=0, tie_break=tie_break)
    for s in part.server_ids:
        dists = {c: fw[s - 1, c - 1] for c in part.core_ids}
        best = min(dists.values())
        if best > d_max:
            assert s in ca.unassigned
            continue
        a = ca.assignments[s]
        assert a.hops == best and dists[a.core] == best
        if tie_break == "lowest_id":
            assert a.core == min(c for c, d in dists.items() if d == best)
        walk = (a.core, *a.path, s)
        assert all(g.has_edge(u, v) for u, v in zip(walk, walk[1:]))
    assert sum(ca.cluster_sizes()) + len(ca.unassigned) + part.n_cores == g.n_nodes
