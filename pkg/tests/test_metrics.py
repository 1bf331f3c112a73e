import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sfcluster.metrics import align, fidelity, trace_distance
from sfcluster.powerlaw import DegreeDistribution, PowerLawParams, theoretical_distribution


def dists(max_len=30):
    return st.lists(st.integers(0, 1000), min_size=1, max_size=max_len).filter(
        lambda c: sum(c) > 0).map(lambda c: np.array(c, float) / sum(c))


def test_hand_values():
    p, q = [0.5, 0.5], [1.0, 0.0]
    assert trace_distance(p, q) == 0.5
    assert fidelity(p, q) == pytest.approx(math.sqrt(0.5))


def test_disjoint_supports():
    assert trace_distance([1.0], [0.0, 1.0]) == 1.0
    assert fidelity([1.0], [0.0, 1.0]) == 0.0


def test_align_pads_by_kind():
    emp = DegreeDistribution([1.0])
    th = theoretical_distribution(PowerLawParams(2.5), 1)
    a, b = align(emp, th)
    assert len(a) == len(b) == 1
    a, b = align(DegreeDistribution([0.5, 0.0, 0.5]), th)
    assert b[2] > 0 and a[1] == 0


def test_negative_rejected():
    with pytest.raises(ValueError):
        trace_distance([-0.1, 1.1], [0.5, 0.5])


@settings(max_examples=300)
@given(dists(), dists(), dists())
def test_metric_axioms(p, q, r):
    d = trace_distance
    assert d(p, p) == 0.0
    assert d(p, q) == d(q, p)
    assert 0.0 <= d(p, q) <= 1.0 + 1e-12
    assert d(p, r) <= d(p, q) + d(q, r) + 1e-12


@settings(max_examples=300)
@given(dists(), dists())
def test_fidelity_bounds(p, q):
    f, t = fidelity(p, q), trace_distance(p, q)
    assert -1e-12 <= f <= 1.0 + 1e-12
    assert fidelity(p, q) == pytest.approx(fidelity(q, p), abs=1e-15)
    # Fuchs-van de Graaf: 1 - F <= T <= sqrt(1 - F^2)
    assert 1 - f <= t + 1e-12
    assert t <= math.sqrt(max(0.0, 1 - f * f)) + 1e-9


@given(dists())
def test_self_fidelity_is_mass(p):
    assert fidelity(p, p) == math.fsum(p)


@given(st.lists(st.integers(0, 64), min_size=1, max_size=20).filter(lambda c: sum(c) > 0))
def test_self_fidelity_exactly_one(counts):
    # Dyadic probabilities sum to exactly one, so fidelity must be exactly one.
    scale = 2 ** math.ceil(math.log2(sum(counts)))
    counts[-1] += scale - sum(counts)
    p = np.array(counts, float) / scale
    assert math.fsum(p) == 1.0
    assert fidelity(p, p) == 1.0
    assert trace_distance(p, p) == 0.0


def test_hand_evaluated_distance():
    assert trace_distance([0.5, 0.5], [0.75, 0.25]) == 0.25


def test_fidelity_needs_aligned_labels():
    assert fidelity([0.5, 0.5], [0.5, 0.5]) == 1.0
    assert fidelity([0.5, 0.5, 0.0], [0.0, 0.5, 0.5]) == 0.5


@given(dists(8), dists(8))
def test_full_fidelity_means_zero_distance(p, q):
    if fidelity(p, q) == 1.0:
        assert trace_distance(p, q) == pytest.approx(0.0, abs=1e-7)
