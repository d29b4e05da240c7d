import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bicompress.graph import BipartiteGraph, Ordering, is_bijection, random_ordering, transpose
from bicompress.objective import bim_log_gap, log_gap_union
from bicompress.recbis import (
    CONFIGS,
    BoundarySummary,
    RecBisParams,
    SwapFlip,
    arrange,
    bisect,
    boundary_summary,
    config_cost,
    expected_cost,
    partition_cost,
    recbis_order,
    recbis_unipartite,
    swap_flip_decide,
    union_ordering,
)
from bicompress.synthetic import planted_blocks, random_bipartite

from conftest import graphs


def exhaustive_optimum(g: BipartiteGraph) -> float:
    """Minimum of the log-gap objective over all top permutations."""
    n = g.n_top
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    total = np.zeros(len(perms))
    for nb in g.adjacency():
        if len(nb) < 2:
            continue
        p = np.sort(perms[:, nb], axis=1)
        total += np.log2(np.diff(p, axis=1)).sum(axis=1)
    return float(total.min())


def clique_instance(rng, n):
    """Cliques of tops interleaved in id order, one or two queries each."""
    k = int(rng.integers(1, 4))
    cuts = np.sort(rng.choice(np.arange(1, n), size=min(k - 1, n - 1), replace=False))
    adj = []
    for block in np.split(rng.permutation(n), cuts):
        for _ in range(int(rng.integers(1, 3))):
            adj.append(sorted(block.tolist()))
    return BipartiteGraph.from_adjacency(adj, n)


def brute_force_config(b):
    return min(config_cost(b, c) for c in CONFIGS)


def test_expected_cost_model():
    assert expected_cost(4, 0, 4, 4) == 0.0
    assert expected_cost(2, 0, 4, 4) == pytest.approx(2.0)
    # a query split 2/2 pays its spread in each half plus the crossing term
    assert expected_cost(2, 2, 4, 4) == pytest.approx(2 + 2 + math.log2(4 / 3 + 4 / 3))
    assert expected_cost(3, 1, 4, 4) > expected_cost(4, 0, 4, 4)


def test_fig1_boundary_costs():
    b = BoundarySummary.of(4, 4, min1=[1], max1=[3], min2=[2], max2=[2])
    assert 2 ** config_cost(b, SwapFlip()) == pytest.approx(3)
    assert 2 ** config_cost(b, SwapFlip(flip1=True)) == pytest.approx(2)
    assert swap_flip_decide(b) == SwapFlip(flip1=True)


def test_no_spanning_queries_default():
    assert swap_flip_decide(BoundarySummary.of(3, 5)) == SwapFlip()


def test_tie_prefers_no_swap_no_flip():
    # symmetric instance: every configuration costs the same
    b = BoundarySummary.of(2, 2, min1=[1], max1=[2], min2=[1], max2=[2])
    assert swap_flip_decide(b) == SwapFlip()


@given(st.integers(1, 20), st.integers(1, 20), st.data())
@settings(max_examples=200)
def test_swap_flip_matches_brute_force(n1, n2, data):
    k = data.draw(st.integers(0, 6))
    rows = []
    for _ in range(k):
        a = sorted(data.draw(st.lists(st.integers(1, n1), min_size=1, max_size=2)))
        c = sorted(data.draw(st.lists(st.integers(1, n2), min_size=1, max_size=2)))
        rows.append((a[0], a[-1], c[0], c[-1]))
    cols = list(zip(*rows)) if rows else [(), (), (), ()]
    b = BoundarySummary.of(n1, n2, *cols)
    chosen = swap_flip_decide(b)
    assert config_cost(b, chosen) == pytest.approx(brute_force_config(b), abs=1e-9)


def test_boundary_summary_and_arrange():
    # data -> queries: vertices 0..3, query 0 touches 1 and 2
    g = BipartiteGraph.from_adjacency([[1, 2]], 4)
    gt = transpose(g)
    b = boundary_summary(gt.indptr, gt.indices, np.array([0, 1]), np.array([2, 3]))
    assert (b.n1, b.n2) == (2, 2)
    assert (b.min1.tolist(), b.max1.tolist(), b.min2.tolist(), b.max2.tolist()) == ([2], [2], [1], [1])
    assert arrange(np.array([0, 1]), np.array([2, 3]), SwapFlip(True, True, False)).tolist() == [2, 3, 1, 0]


def test_flip_keeps_inner_gaps(rng):
    g = random_bipartite(30, 40, 120, seed=3)
    seq = rng.permutation(30)
    half1, half2 = set(seq[:15].tolist()), set(seq[15:].tolist())
    confined = BipartiteGraph.from_adjacency(
        [nb for nb in g.adjacency() if set(nb) <= half1 or set(nb) <= half2], 30
    )
    values = {round(bim_log_gap(confined, Ordering.from_sequence(arrange(seq[:15], seq[15:], c))), 9)
              for c in CONFIGS}
    assert len(values) == 1


def test_single_vertex_and_tiny():
    g = BipartiteGraph.from_adjacency([[0]], 1)
    assert recbis_order(g).perm.tolist() == [0]
    pi, phi = recbis_unipartite(g)
    assert pi.perm.tolist() == [0] and phi.perm.tolist() == [0]


def test_two_interleaved_cliques():
    g = BipartiteGraph.from_adjacency([[0, 2, 4, 6], [1, 3, 5, 7]], 8)
    o = recbis_order(g, "top", RecBisParams(leaf_size=1))
    assert bim_log_gap(g, o) == 0.0 == exhaustive_optimum(g)


@pytest.mark.parametrize("seed", range(12))
def test_exhaustive_optimum_small_cliques(seed):
    rng = np.random.default_rng(seed)
    g = clique_instance(rng, int(rng.integers(3, 9)))
    o = recbis_order(g, "top", RecBisParams(leaf_size=1, seed=seed))
    assert bim_log_gap(g, o) == pytest.approx(exhaustive_optimum(g), abs=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_beats_random_on_random_instance(seed):
    g = random_bipartite(50, 80, 400, seed=seed)
    o = recbis_order(g, "top", RecBisParams(seed=seed, leaf_size=4))
    assert is_bijection(o.perm)
    assert bim_log_gap(g, o) <= bim_log_gap(g, random_ordering(50, seed))


@pytest.mark.parametrize("seed", range(10))
def test_unipartite_beats_random(seed):
    g = random_bipartite(50, 80, 400, seed=seed)
    p = RecBisParams(seed=seed, leaf_size=4)
    u = union_ordering(g, p)
    assert log_gap_union(g, u) <= log_gap_union(g, random_ordering(130, seed))
    pi, phi = recbis_unipartite(g, p)
    assert is_bijection(pi.perm) and is_bijection(phi.perm)
    # projection keeps the relative union order of each side
    tops = [v for v in u.inv if v < 50]
    assert pi.inv.tolist() == tops


def test_history_monotone_and_matches_model():
    g = planted_blocks(seed=3)
    gt = transpose(g)
    adj = g.adjacency()
    for seed in range(3):
        a, b, hist = bisect(gt.indptr, gt.indices, np.arange(g.n_top), 0, RecBisParams(seed=seed))
        assert len(a) == len(b) == g.n_top // 2
        assert np.all(np.diff(hist) <= 1e-9)
        side = np.zeros(g.n_top, dtype=int)
        side[b] = 1
        assert partition_cost(adj, side) == pytest.approx(hist[-1], rel=1e-9)


@given(graphs(max_top=25, max_bot=25), st.integers(0, 1000))
@settings(max_examples=40, deadline=None)
def test_bisection_balanced_and_not_worse(g, seed):
    gt = transpose(g)
    n = g.n_top
    a, b, hist = bisect(gt.indptr, gt.indices, np.arange(n), 0, RecBisParams(seed=seed))
    assert len(a) == (n + 1) // 2 and len(b) == n // 2
    assert sorted(np.concatenate([a, b]).tolist()) == list(range(n))
    assert hist[-1] <= hist[0] + 1e-9


@given(graphs(), st.integers(0, 2**32), st.sampled_from(["top", "bottom"]))
@settings(max_examples=40, deadline=None)
def test_order_is_bijection_and_deterministic(g, seed, side):
    p = RecBisParams(seed=seed, leaf_size=2)
    o = recbis_order(g, side, p)
    assert is_bijection(o.perm)
    assert o == recbis_order(g, side, p)


def test_parallel_matches_serial():
    g = planted_blocks(seed=2)
    serial = recbis_order(g, "top", RecBisParams(seed=9))
    threaded = recbis_order(g, "top", RecBisParams(seed=9, parallel=True, workers=4))
    assert serial == threaded


def test_swapflip_boundaries_are_minimal():
    """At the root, the realized arrangement is the cheapest of the 8."""
    g = planted_blocks(n_blocks=6, block_size=10, queries_per_block=8, degree=4, seed=1)
    gt = transpose(g)
    p = RecBisParams(seed=1, leaf_size=8)
    seq = recbis_order(g, "top", p).inv
    half = (len(seq) + 1) // 2
    s1, s2 = seq[:half], seq[half:]
    b = boundary_summary(gt.indptr, gt.indices, s1, s2)
    # the default arrangement of the realized halves must be the minimum
    assert config_cost(b, SwapFlip()) == pytest.approx(brute_force_config(b), abs=1e-9)


def test_invalid_params():
    with pytest.raises(ValueError):
        RecBisParams(leaf_size=0)
    with pytest.raises(ValueError):
        recbis_order(BipartiteGraph.from_adjacency([[0]]), side="left")
