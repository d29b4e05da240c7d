import math

import numpy as np
import pytest
from hypothesis import strategies as st

from bicompress.graph import BipartiteGraph


def naive_bim_log_gap(adj, pos):
    """Sum of log2 gaps, computed position by position."""
    total = 0.0
    for nb in adj:
        ps = sorted(pos[t] for t in nb)
        for a, b in zip(ps, ps[1:]):
            total += math.log2(b - a)
    return total


def naive_union_log_gap(adj, n_top, union_pos):
    """Unipartite objective over the union graph, neighborhoods of both sides."""
    n_bot = len(adj)
    nbrs = [[] for _ in range(n_top + n_bot)]
    for q, nb in enumerate(adj):
        for t in nb:
            nbrs[t].append(n_top + q)
            nbrs[n_top + q].append(t)
    return naive_bim_log_gap(nbrs, union_pos)


def has_cycle(parent):
    """Iterative three-color DFS over parent pointers."""
    n = len(parent)
    color = [0] * n
    for s in range(n):
        if color[s]:
            continue
        stack = []
        u = s
        while u >= 0 and color[u] == 0:
            color[u] = 1
            stack.append(u)
            u = int(parent[u])
        if u >= 0 and color[u] == 1:
            return True
        for w in stack:
            color[w] = 2
    return False


def random_graph(rng, max_top=40, max_bot=40, max_deg=12, p_empty=0.1):
    n_top = int(rng.integers(1, max_top + 1))
    n_bot = int(rng.integers(1, max_bot + 1))
    adj = []
    for _ in range(n_bot):
        if rng.random() < p_empty:
            adj.append([])
            continue
        k = int(rng.integers(1, min(max_deg, n_top) + 1))
        adj.append(sorted(rng.choice(n_top, size=k, replace=False).tolist()))
    return BipartiteGraph.from_adjacency(adj, n_top)


def clustered_graph(rng, n_top=60, n_bot=80, n_proto=6, noise=0.2):
    """Bottoms copy one of a few prototype neighborhoods with some noise, so
    that referencing actually pays off."""
    protos = [rng.choice(n_top, size=int(rng.integers(3, 15)), replace=False) for _ in range(n_proto)]
    adj = []
    for _ in range(n_bot):
        nb = set(protos[rng.integers(n_proto)].tolist())
        for t in rng.integers(0, n_top, size=int(rng.integers(0, 4))):
            if rng.random() < noise:
                nb.symmetric_difference_update({int(t)})
        adj.append(sorted(nb))
    return BipartiteGraph.from_adjacency(adj, n_top)


@st.composite
def graphs(draw, max_top=30, max_bot=30, max_deg=10):
    n_top = draw(st.integers(1, max_top))
    n_bot = draw(st.integers(0, max_bot))
    adj = draw(st.lists(
        st.lists(st.integers(0, n_top - 1), max_size=max_deg, unique=True).map(sorted),
        min_size=n_bot, max_size=n_bot,
    ))
    return BipartiteGraph.from_adjacency(adj, n_top)


@st.composite
def clustered_graphs(draw, max_top=30, max_bot=40):
    """Bottoms drawn from a handful of shared neighborhoods, plus noise."""
    n_top = draw(st.integers(2, max_top))
    protos = draw(st.lists(st.sets(st.integers(0, n_top - 1), min_size=1, max_size=12),
                           min_size=1, max_size=4))
    n_bot = draw(st.integers(1, max_bot))
    adj = []
    for _ in range(n_bot):
        base = set(protos[draw(st.integers(0, len(protos) - 1))])
        flip = draw(st.sets(st.integers(0, n_top - 1), max_size=3))
        adj.append(sorted(base ^ flip))
    return BipartiteGraph.from_adjacency(adj, n_top)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
