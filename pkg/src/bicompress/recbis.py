"""Recursive bisection ordering with partition swapping and flipping.

The data vertices of a subset are split into two halves of sizes ``N1 =
ceil(n/2)`` and ``N2 = floor(n/2)`` by Fiduccia-Mattheyses passes over an
expected gap cost.  For a query with ``d1`` and ``d2`` neighbors in the
halves the cost is::

    d1*log2(N1/d1) + d2*log2(N2/d2) + [d1 and d2] * log2(N1/(d1+1) + N2/(d2+1))

i.e. each group of neighbors is assumed evenly spread over its half, plus
one crossing gap when the query spans both.  Only queries with at least
two neighbors inside the subset contribute.  The halves are then ordered
recursively, and once both inner orders are known the ``V1V2``/``V2V1``
arrangement and the reversal of each half are chosen to minimize the log
of the gaps across the boundary.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numba import njit

from .graph import INDEX_DTYPE, BipartiteGraph, Ordering, transpose

TOLERANCE = 1e-9


@dataclass(frozen=True)
class RecBisParams:
    leaf_size: int = 32
    max_passes: int = 10
    seed: int = 0
    swapflip: bool = True
    parallel: bool = False
    workers: int | None = None

    def __post_init__(self):
        if self.leaf_size < 1:
            raise ValueError("leaf_size must be >= 1")
        if self.max_passes < 0:
            raise ValueError("max_passes must be >= 0")


# -- expected cost model ----------------------------------------------------

def expected_cost(d1: int, d2: int, n1: int, n2: int) -> float:
    """Expected gap cost of one query with ``d1``/``d2`` neighbors in halves
    of ``n1``/``n2`` slots."""
    c = 0.0
    if d1 > 0:
        c += d1 * math.log2(n1 / d1)
    if d2 > 0:
        c += d2 * math.log2(n2 / d2)
    if d1 > 0 and d2 > 0:
        c += math.log2(n1 / (d1 + 1) + n2 / (d2 + 1))
    return c


def partition_cost(neighborhoods, side, n1: int | None = None, n2: int | None = None) -> float:
    """Model value of a bisection.  ``neighborhoods`` lists, per query, the
    local data indices it touches; ``side[v]`` is 0 or 1."""
    side = np.asarray(side)
    if n1 is None:
        n1 = (len(side) + 1) // 2
        n2 = len(side) // 2
    total = 0.0
    for nb in neighborhoods:
        if len(nb) < 2:
            continue
        d2 = int(np.sum(side[np.asarray(nb)]))
        total += expected_cost(len(nb) - d2, d2, n1, n2)
    return total


@njit(cache=True)
def _f(d1, d2, n1, n2):
    c = 0.0
    if d1 > 0:
        c += d1 * np.log2(n1 / d1)
    if d2 > 0:
        c += d2 * np.log2(n2 / d2)
    if d1 > 0 and d2 > 0:
        c += np.log2(n1 / (d1 + 1) + n2 / (d2 + 1))
    return c


@njit(cache=True)
def _delta(s, d1, d2, n1, n2):
    # decrease of the query cost when one of its vertices on side s moves across
    if s == 0:
        return _f(d1, d2, n1, n2) - _f(d1 - 1, d2 + 1, n1, n2)
    return _f(d1, d2, n1, n2) - _f(d1 + 1, d2 - 1, n1, n2)


# -- indexed binary max-heap ------------------------------------------------

@njit(cache=True, inline="always")
def _before(key, a, b):
    return key[a] > key[b] or (key[a] == key[b] and a < b)


@njit(cache=True)
def _sift_up(heap, hpos, key, i):
    v = heap[i]
    while i > 0:
        p = (i - 1) >> 1
        u = heap[p]
        if _before(key, v, u):
            heap[i] = u
            hpos[u] = i
            i = p
        else:
            break
    heap[i] = v
    hpos[v] = i


@njit(cache=True)
def _sift_down(heap, hpos, key, i, size):
    v = heap[i]
    while True:
        c = 2 * i + 1
        if c >= size:
            break
        if c + 1 < size and _before(key, heap[c + 1], heap[c]):
            c += 1
        if _before(key, heap[c], v):
            heap[i] = heap[c]
            hpos[heap[i]] = i
            i = c
        else:
            break
    heap[i] = v
    hpos[v] = i


@njit(cache=True)
def _fm_bisect(dq_ptr, dq_idx, qd_ptr, qd_idx, side, n1, n2, max_passes):
    """FM passes on a local instance.  Returns the model value after the
    initial split and after every pass."""
    n = len(dq_ptr) - 1
    nq = len(qd_ptr) - 1
    d = np.zeros((2, nq), dtype=np.int64)
    gain = np.zeros(n, dtype=np.float64)
    heaps = np.zeros((2, n), dtype=np.int64)
    size = np.zeros(2, dtype=np.int64)
    hpos = np.full(n, -1, dtype=np.int64)
    moved = np.zeros(n, dtype=np.int64)
    history = np.zeros(max_passes + 1, dtype=np.float64)

    for q in range(nq):
        for t in range(qd_ptr[q], qd_ptr[q + 1]):
            d[side[qd_idx[t]], q] += 1
    total = 0.0
    for q in range(nq):
        total += _f(d[0, q], d[1, q], n1, n2)
    history[0] = total
    n_hist = 1

    for npass in range(max_passes):
        if npass > 0:
            d[:, :] = 0
            for q in range(nq):
                for t in range(qd_ptr[q], qd_ptr[q + 1]):
                    d[side[qd_idx[t]], q] += 1
        size[:] = 0
        for v in range(n):
            g = 0.0
            s = side[v]
            for t in range(dq_ptr[v], dq_ptr[v + 1]):
                q = dq_idx[t]
                g += _delta(s, d[0, q], d[1, q], n1, n2)
            gain[v] = g
            heaps[s, size[s]] = v
            hpos[v] = size[s]
            size[s] += 1
        for s in range(2):
            for i in range(size[s] // 2 - 1, -1, -1):
                _sift_down(heaps[s], hpos, gain, i, size[s])

        c1 = 0
        for v in range(n):
            c1 += 1 - side[v]
        nm = 0
        cum = 0.0
        best = 0.0
        best_k = 0
        while True:
            # each half may drift one vertex from its nominal size
            ok0 = size[0] > 0 and c1 >= n1
            ok1 = size[1] > 0 and c1 <= n1
            if not ok0 and not ok1:
                break
            if ok0 and ok1:
                s = 0 if not _before(gain, heaps[1, 0], heaps[0, 0]) else 1
            elif ok0:
                s = 0
            else:
                s = 1
            h = heaps[s]
            v = h[0]
            size[s] -= 1
            if size[s] > 0:
                h[0] = h[size[s]]
                _sift_down(h, hpos, gain, 0, size[s])
            hpos[v] = -1
            cum += gain[v]
            side[v] = 1 - s
            c1 += -1 if s == 0 else 1
            moved[nm] = v
            nm += 1
            for t in range(dq_ptr[v], dq_ptr[v + 1]):
                q = dq_idx[t]
                a, b = d[0, q], d[1, q]
                old0 = _delta(0, a, b, n1, n2)
                old1 = _delta(1, a, b, n1, n2)
                if s == 0:
                    a -= 1
                    b += 1
                else:
                    a += 1
                    b -= 1
                d[0, q] = a
                d[1, q] = b
                new0 = _delta(0, a, b, n1, n2)
                new1 = _delta(1, a, b, n1, n2)
                for r in range(qd_ptr[q], qd_ptr[q + 1]):
                    u = qd_idx[r]
                    p = hpos[u]
                    if p < 0:
                        continue
                    if side[u] == 0:
                        gain[u] += new0 - old0
                    else:
                        gain[u] += new1 - old1
                    su = side[u]
                    _sift_up(heaps[su], hpos, gain, p)
                    _sift_down(heaps[su], hpos, gain, hpos[u], size[su])
            if c1 == n1 and cum > best + 1e-9:
                best = cum
                best_k = nm
        for i in range(best_k, nm):
            side[moved[i]] = 1 - side[moved[i]]
        for v in range(n):
            hpos[v] = -1
        total -= best
        history[n_hist] = total
        n_hist += 1
        if best <= 1e-9:
            break
    return history[:n_hist]


# -- swap / flip --------------------------------------------------------------

class BoundarySummary(NamedTuple):
    """Inner positions (1-based) of the first and last neighbor in each half
    for every query with neighbors in both halves."""

    n1: int
    n2: int
    min1: np.ndarray
    max1: np.ndarray
    min2: np.ndarray
    max2: np.ndarray

    @classmethod
    def of(cls, n1, n2, min1=(), max1=(), min2=(), max2=()) -> "BoundarySummary":
        a = [np.atleast_1d(np.asarray(x, dtype=INDEX_DTYPE)) for x in (min1, max1, min2, max2)]
        return cls(int(n1), int(n2), *a)


class SwapFlip(NamedTuple):
    swap: bool = False
    flip1: bool = False
    flip2: bool = False


# preference order for ties: no swap first, then fewer flips
CONFIGS = tuple(
    SwapFlip(swap, f1, f2)
    for swap in (False, True)
    for f1, f2 in ((False, False), (True, False), (False, True), (True, True))
)


def boundary_gaps(b: BoundarySummary, config: SwapFlip) -> np.ndarray:
    """Gap between the last neighbor in the leading half and the first in
    the trailing half, per spanning query."""
    min1, max1, min2, max2 = b.min1, b.max1, b.min2, b.max2
    if config.flip1:
        min1, max1 = b.n1 + 1 - max1, b.n1 + 1 - min1
    if config.flip2:
        min2, max2 = b.n2 + 1 - max2, b.n2 + 1 - min2
    if config.swap:
        return b.n2 + min1 - max2
    return b.n1 + min2 - max1


def config_cost(b: BoundarySummary, config: SwapFlip) -> float:
    gaps = boundary_gaps(b, config)
    return float(np.sum(np.log2(gaps.astype(np.float64)))) if len(gaps) else 0.0


def swap_flip_decide(b: BoundarySummary) -> SwapFlip:
    """Pick the arrangement of two ordered halves with the smallest
    boundary cost among the 8 swap/flip configurations."""
    if len(b.min1) == 0:
        return CONFIGS[0]
    costs = [config_cost(b, c) for c in CONFIGS]
    low = min(costs)
    for c, v in zip(CONFIGS, costs):
        if v <= low + TOLERANCE * max(1.0, abs(low)):
            return c
    raise AssertionError("unreachable")


def _per_query_extent(data_ptr, data_idx, seq):
    """(query ids, min position, max position) of the queries touched by
    ``seq``, positions 1-based within ``seq``."""
    starts = data_ptr[seq]
    lens = data_ptr[seq + 1] - starts
    qs = _gather(data_idx, starts, lens)
    pos = np.repeat(np.arange(1, len(seq) + 1, dtype=INDEX_DTYPE), lens)
    if len(qs) == 0:
        e = np.zeros(0, dtype=INDEX_DTYPE)
        return e, e, e
    order = np.lexsort((pos, qs))
    qs, pos = qs[order], pos[order]
    head = np.flatnonzero(np.r_[True, qs[1:] != qs[:-1]])
    tail = np.r_[head[1:] - 1, len(qs) - 1]
    return qs[head], pos[head], pos[tail]


def boundary_summary(data_ptr, data_idx, seq1, seq2) -> BoundarySummary:
    """Summarize the queries spanning two ordered halves.  ``data_ptr`` /
    ``data_idx`` map each data vertex to its queries."""
    q1, lo1, hi1 = _per_query_extent(data_ptr, data_idx, seq1)
    q2, lo2, hi2 = _per_query_extent(data_ptr, data_idx, seq2)
    _, i1, i2 = np.intersect1d(q1, q2, assume_unique=True, return_indices=True)
    return BoundarySummary(len(seq1), len(seq2), lo1[i1], hi1[i1], lo2[i2], hi2[i2])


def arrange(seq1, seq2, config: SwapFlip) -> np.ndarray:
    a = seq1[::-1] if config.flip1 else seq1
    b = seq2[::-1] if config.flip2 else seq2
    return np.concatenate([b, a] if config.swap else [a, b])


# -- driver ---------------------------------------------------------------------

def _gather(idx, starts, lens):
    total = int(lens.sum())
    if total == 0:
        return np.zeros(0, dtype=INDEX_DTYPE)
    run_start = np.cumsum(lens) - lens
    offs = np.arange(total, dtype=INDEX_DTYPE) - np.repeat(run_start, lens)
    return idx[np.repeat(starts, lens) + offs]


def local_instance(data_ptr, data_idx, subset):
    """Local CSR pair (data -> queries, queries -> data) for ``subset``,
    keeping only queries with at least two neighbors inside it."""
    subset = np.asarray(subset, dtype=INDEX_DTYPE)
    n = len(subset)
    starts = data_ptr[subset]
    lens = data_ptr[subset + 1] - starts
    qs = _gather(data_idx, starts, lens)
    rows = np.repeat(np.arange(n, dtype=INDEX_DTYPE), lens)
    uq, inv, cnt = np.unique(qs, return_inverse=True, return_counts=True)
    inv = inv.ravel()
    keep_q = cnt >= 2
    local_id = np.cumsum(keep_q) - 1
    mask = keep_q[inv]
    rows, lq = rows[mask], local_id[inv[mask]].astype(INDEX_DTYPE)
    nq = int(keep_q.sum())
    dq_ptr = np.zeros(n + 1, dtype=INDEX_DTYPE)
    np.cumsum(np.bincount(rows, minlength=n), out=dq_ptr[1:])
    dq_idx = lq  # rows are already grouped in subset order
    order = np.argsort(lq, kind="stable")
    qd_ptr = np.zeros(nq + 1, dtype=INDEX_DTYPE)
    np.cumsum(np.bincount(lq, minlength=nq), out=qd_ptr[1:])
    qd_idx = rows[order]
    return dq_ptr, dq_idx, qd_ptr, qd_idx


def _task_rng(seed: int, lo: int, n: int) -> np.random.Generator:
    return np.random.default_rng([seed % 2**63, lo, n])


def bisect(data_ptr, data_idx, subset, lo: int, params: RecBisParams):
    """Split ``subset`` (placed from position ``lo``) into two halves.

    Returns ``(first, second, history)`` where ``history`` holds the model
    value after the random initial split and after each committed pass.
    """
    subset = np.asarray(subset, dtype=INDEX_DTYPE)
    n = len(subset)
    n1, n2 = (n + 1) // 2, n // 2
    side = np.ones(n, dtype=INDEX_DTYPE)
    side[_task_rng(params.seed, lo, n).permutation(n)[:n1]] = 0
    dq_ptr, dq_idx, qd_ptr, qd_idx = local_instance(data_ptr, data_idx, subset)
    if len(qd_ptr) > 1 and params.max_passes > 0:
        history = _fm_bisect(dq_ptr, dq_idx, qd_ptr, qd_idx, side, n1, n2, params.max_passes)
    else:
        history = np.zeros(1)
    return subset[side == 0], subset[side == 1], history


def _recbis(data_ptr, data_idx, n_data: int, params: RecBisParams) -> np.ndarray:
    """Order ``n_data`` vertices given, for each, its list of queries;
    returns the vertex sequence."""
    # top-down: split level by level; nodes are (subset, lo, children)
    root = [np.arange(n_data, dtype=INDEX_DTYPE), 0, None]
    levels = [[root]]
    pool = ThreadPoolExecutor(max_workers=params.workers) if params.parallel else None
    try:
        frontier = [root]
        while frontier:
            work = [node for node in frontier if len(node[0]) > params.leaf_size]

            def split(node):
                return bisect(data_ptr, data_idx, node[0], node[1], params)

            results = list(pool.map(split, work)) if pool else [split(nd) for nd in work]
            nxt = []
            for node, (a, b, _) in zip(work, results):
                ca = [a, node[1], None]
                cb = [b, node[1] + len(a), None]
                node[2] = (ca, cb)
                nxt += [ca, cb]
            if nxt:
                levels.append(nxt)
            frontier = nxt

        # bottom-up: combine children, deciding swap/flip
        for level in reversed(levels):
            work = [node for node in level if node[2] is not None]

            def combine(node):
                (s1, _, _), (s2, _, _) = node[2]
                if params.swapflip:
                    cfg = swap_flip_decide(boundary_summary(data_ptr, data_idx, s1, s2))
                else:
                    cfg = CONFIGS[0]
                return arrange(s1, s2, cfg)

            results = list(pool.map(combine, work)) if pool else [combine(nd) for nd in work]
            for node, seq in zip(work, results):
                node[0] = seq
                node[2] = None
    finally:
        if pool:
            pool.shutdown()
    return root[0]


def recbis_order(g: BipartiteGraph, side: str = "top", params: RecBisParams | None = None) -> Ordering:
    """Order one side of ``g``; the vertices of the other side act as queries.

    ``side="top"`` orders the data vertices of the stored adjacency, the
    usual setup where each bottom vertex lists its top neighbors.
    """
    params = params or RecBisParams()
    if side in ("top", "⊤"):
        gt = transpose(g)
        seq = _recbis(gt.indptr, gt.indices, g.n_top, params)
    elif side in ("bottom", "bot", "⊥"):
        seq = _recbis(g.indptr, g.indices, g.n_bot, params)
    else:
        raise ValueError(f"side must be 'top' or 'bottom', got {side!r}")
    return Ordering.from_sequence(seq)


def union_adjacency(g: BipartiteGraph) -> tuple[np.ndarray, np.ndarray]:
    """CSR of the union graph: top ``t`` is ``t``, bottom ``q`` is ``n_top + q``."""
    gt = transpose(g)
    n = g.n_top + g.n_bot
    deg = np.concatenate([np.diff(gt.indptr), np.diff(g.indptr)])
    indptr = np.zeros(n + 1, dtype=INDEX_DTYPE)
    np.cumsum(deg, out=indptr[1:])
    indices = np.concatenate([gt.indices + g.n_top, g.indices]).astype(INDEX_DTYPE)
    return indptr, indices


def recbis_unipartite(g: BipartiteGraph, params: RecBisParams | None = None) -> tuple[Ordering, Ordering]:
    """Order both sides as one vertex set, then split the union order into
    per-side orderings by relative rank."""
    params = params or RecBisParams()
    indptr, indices = union_adjacency(g)
    seq = _recbis(indptr, indices, g.n_top + g.n_bot, params)
    tops = seq[seq < g.n_top]
    bots = seq[seq >= g.n_top] - g.n_top
    return Ordering.from_sequence(tops), Ordering.from_sequence(bots)


def union_ordering(g: BipartiteGraph, params: RecBisParams | None = None) -> Ordering:
    """The single union-space ordering computed by :func:`recbis_unipartite`."""
    params = params or RecBisParams()
    indptr, indices = union_adjacency(g)
    return Ordering.from_sequence(_recbis(indptr, indices, g.n_top + g.n_bot, params))
