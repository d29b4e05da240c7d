"""Gap-cost objectives and ordering diagnostics.

All logarithms are base 2; a gap is the positive difference between
consecutive positions of a vertex's neighbors once they are sorted.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .graph import BipartiteGraph, DimensionError, Ordering, transpose


def sum_log_gaps(indptr: np.ndarray, indices: np.ndarray, pos: np.ndarray) -> float:
    """Sum of log2 gaps of every list ``indices[indptr[i]:indptr[i+1]]``
    after mapping each entry through ``pos`` and sorting."""
    if len(indices) < 2:
        return 0.0
    p = np.asarray(pos)[indices]
    row = np.repeat(np.arange(len(indptr) - 1), np.diff(indptr))
    key = np.lexsort((p, row))
    p = p[key]
    same = row[1:] == row[:-1]
    gaps = (p[1:] - p[:-1])[same]
    if len(gaps) == 0:
        return 0.0
    if gaps.min() <= 0:
        raise ValueError("positions are not distinct within a neighborhood")
    return float(np.sum(np.log2(gaps.astype(np.float64))))


def bim_log_gap(g: BipartiteGraph, pi: Ordering) -> float:
    """Bipartite log-gap cost of the top ordering ``pi``: for every bottom
    vertex, the sum of log2 distances between consecutive neighbor positions."""
    if len(pi) != g.n_top:
        raise DimensionError(f"ordering has {len(pi)} entries, graph has {g.n_top} top vertices")
    return sum_log_gaps(g.indptr, g.indices, pi.perm)


def log_gap_union(g: BipartiteGraph, order: Ordering) -> float:
    """Log-gap cost over the union vertex set.

    Union ids put the top vertices first (``0..n_top-1``) followed by the
    bottom vertices offset by ``n_top``.  Every vertex of either side pays
    for the gaps between its neighbors' union positions.
    """
    if len(order) != g.n_top + g.n_bot:
        raise DimensionError(
            f"union ordering has {len(order)} entries, expected {g.n_top + g.n_bot}"
        )
    pos_top = order.perm[: g.n_top]
    pos_bot = order.perm[g.n_top:]
    gt = transpose(g)
    return sum_log_gaps(g.indptr, g.indices, pos_top) + sum_log_gaps(gt.indptr, gt.indices, pos_bot)


@njit(cache=True)
def intersection_size(indices, a0, a1, b0, b1):
    n = 0
    i, j = a0, b0
    while i < a1 and j < b1:
        x = indices[i]
        y = indices[j]
        if x == y:
            n += 1
            i += 1
            j += 1
        elif x < y:
            i += 1
        else:
            j += 1
    return n


@njit(cache=True)
def jaccard_csr(indptr, indices, u, v):
    a0, a1 = indptr[u], indptr[u + 1]
    b0, b1 = indptr[v], indptr[v + 1]
    union_hint = (a1 - a0) + (b1 - b0)
    if union_hint == 0:
        return 0.0
    inter = intersection_size(indices, a0, a1, b0, b1)
    return inter / (union_hint - inter)


@njit(cache=True)
def _adjacent_jaccard(indptr, indices, seq):
    total = 0.0
    for i in range(len(seq) - 1):
        total += jaccard_csr(indptr, indices, seq[i], seq[i + 1])
    return total


def adjacent_jaccard(g: BipartiteGraph, phi: Ordering) -> float:
    """Mean Jaccard index of bottom vertices adjacent in ``phi``."""
    if len(phi) != g.n_bot:
        raise DimensionError(f"ordering has {len(phi)} entries, graph has {g.n_bot} bottom vertices")
    if g.n_bot < 2:
        return 0.0
    return float(_adjacent_jaccard(g.indptr, g.indices, phi.inv)) / (g.n_bot - 1)
