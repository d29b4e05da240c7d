import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bicompress.graph import BipartiteGraph, Ordering, identity_ordering, random_ordering
from bicompress.objective import adjacent_jaccard, bim_log_gap, log_gap_union
from bicompress.shingle import jaccard

from conftest import graphs, naive_bim_log_gap, naive_union_log_gap, random_graph


def test_consecutive_positions_cost_zero():
    g = BipartiteGraph.from_adjacency([[3, 4, 5]], 8)
    assert bim_log_gap(g, identity_ordering(8)) == 0.0


def test_single_gap():
    g = BipartiteGraph.from_adjacency([[1, 5]], 6)
    assert bim_log_gap(g, identity_ordering(6)) == 2.0


def test_low_degree_queries_free():
    g = BipartiteGraph.from_adjacency([[], [4], [0]], 5)
    assert bim_log_gap(g, random_ordering(5, 1)) == 0.0


def test_union_star_and_path():
    # one bottom with three tops; union order places them consecutively
    g = BipartiteGraph.from_adjacency([[0, 1, 2]], 3)
    order = Ordering.from_sequence([0, 3, 1, 2])
    # top neighborhoods are singletons, the bottom sees tops at 0, 2, 3
    assert log_gap_union(g, order) == pytest.approx(1.0)
    star = Ordering.from_sequence([3, 0, 1, 2])
    assert log_gap_union(g, star) == 0.0
    # path t0 - q0 - t1 under identity: q0 sees positions 0 and 1
    path = BipartiteGraph.from_adjacency([[0, 1]], 2)
    assert log_gap_union(path, identity_ordering(3)) == 0.0
    far = BipartiteGraph.from_adjacency([[0, 1]], 2)
    assert log_gap_union(far, Ordering.from_sequence([0, 2, 1])) == pytest.approx(1.0)


def test_union_size_mismatch():
    g = BipartiteGraph.from_adjacency([[0, 1]], 2)
    with pytest.raises(ValueError):
        log_gap_union(g, identity_ordering(2))


@given(graphs(), st.integers(0, 2**31))
@settings(max_examples=80)
def test_bim_log_gap_matches_naive(g, seed):
    pi = random_ordering(g.n_top, seed)
    assert bim_log_gap(g, pi) == pytest.approx(naive_bim_log_gap(g.adjacency(), pi.perm), abs=1e-9)


@given(graphs(), st.integers(0, 2**31))
@settings(max_examples=60)
def test_union_matches_naive(g, seed):
    order = random_ordering(g.n_top + g.n_bot, seed)
    expect = naive_union_log_gap(g.adjacency(), g.n_top, order.perm)
    assert log_gap_union(g, order) == pytest.approx(expect, abs=1e-9)


@given(graphs(), st.integers(0, 2**31))
@settings(max_examples=60)
def test_objective_symmetries(g, seed):
    pi = random_ordering(g.n_top, seed)
    base = bim_log_gap(g, pi)
    assert base >= 0
    # reading only pi: bottom order is irrelevant, reversal keeps every gap
    assert bim_log_gap(g, pi.reversed()) == pytest.approx(base, abs=1e-9)


def test_adjacent_jaccard_cases(rng):
    same = BipartiteGraph.from_adjacency([[1, 2], [1, 2]], 3)
    assert adjacent_jaccard(same, identity_ordering(2)) == 1.0
    disjoint = BipartiteGraph.from_adjacency([[0], [1]], 2)
    assert adjacent_jaccard(disjoint, identity_ordering(2)) == 0.0
    assert adjacent_jaccard(BipartiteGraph.from_adjacency([[0]], 1), identity_ordering(1)) == 0.0
    for _ in range(20):
        g = random_graph(rng)
        phi = random_ordering(g.n_bot, int(rng.integers(1 << 30)))
        adj = g.adjacency()
        seq = phi.inv
        pairs = [jaccard(adj[a], adj[b]) for a, b in zip(seq, seq[1:])]
        expect = sum(pairs) / len(pairs) if pairs else 0.0
        assert adjacent_jaccard(g, phi) == pytest.approx(expect, abs=1e-12)


def test_log_base_two():
    g = BipartiteGraph.from_adjacency([[0, 8]], 9)
    assert bim_log_gap(g, identity_ordering(9)) == math.log2(8)
    assert np.isfinite(bim_log_gap(g, random_ordering(9, 0)))
