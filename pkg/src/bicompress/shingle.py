"""Min-hash shingle ordering and the SimRef within-bucket greedy ordering.

A shingle of a neighborhood is the minimum of ``mix64(v ^ level_seed)``
over its members, where ``mix64`` is the SplitMix64 finalizer::

    z ^= z >> 30; z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27; z *= 0x94D049BB133111EB
    z ^= z >> 31

and ``level_seed = mix64(seed + (level + 1) * 0x9E3779B97F4A7C15)``.  All
arithmetic is modulo 2**64, so fingerprints are identical on every platform.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .graph import INDEX_DTYPE, BipartiteGraph, Ordering
from .objective import jaccard_csr

MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
GOLDEN = 0x9E3779B97F4A7C15
SENTINEL = np.uint64(2**64 - 1)


def mix64(x) -> np.ndarray:
    z = np.asarray(x, dtype=np.uint64).copy()
    with np.errstate(over="ignore"):
        z ^= z >> np.uint64(30)
        z *= MIX1
        z ^= z >> np.uint64(27)
        z *= MIX2
        z ^= z >> np.uint64(31)
    return z


def level_seed(seed: int, level: int) -> np.uint64:
    return mix64([(seed + (level + 1) * GOLDEN) % 2**64])[0]


def jaccard(a, b) -> float:
    """Exact Jaccard index of two id collections; ``J(empty, empty) = 0``."""
    sa, sb = set(a), set(b)
    union = len(sa | sb)
    return len(sa & sb) / union if union else 0.0


@dataclass
class Fingerprints:
    shingles: np.ndarray  # (levels, n_bot) uint64
    degree: np.ndarray

    @property
    def shingle1(self) -> np.ndarray:
        return self.shingles[0]

    @property
    def shingle2(self) -> np.ndarray | None:
        return self.shingles[1] if len(self.shingles) > 1 else None


def fingerprints(g: BipartiteGraph, seed: int, levels: int = 2) -> Fingerprints:
    if levels not in (1, 2):
        raise ValueError("levels must be 1 or 2")
    deg = g.degrees()
    nonempty = deg > 0
    out = np.full((levels, g.n_bot), SENTINEL, dtype=np.uint64)
    if g.m:
        starts = g.indptr[:-1][nonempty]
        ids = g.indices.astype(np.uint64)
        for lvl in range(levels):
            h = mix64(ids ^ level_seed(seed, lvl))
            out[lvl, nonempty] = np.minimum.reduceat(h, starts)
    return Fingerprints(out, deg)


def _sort_key(fp: Fingerprints) -> np.ndarray:
    n = len(fp.degree)
    keys = [np.arange(n), fp.degree]
    for lvl in range(len(fp.shingles) - 1, -1, -1):
        keys.append(fp.shingles[lvl])
    keys.append(fp.degree == 0)
    return np.lexsort(keys)


def shingle_order(g: BipartiteGraph, seed: int = 0, levels: int = 2) -> Ordering:
    """Sort bottom vertices by (shingle1[, shingle2], degree, id); vertices
    without neighbors go last."""
    fp = fingerprints(g, seed, levels)
    return Ordering.from_sequence(_sort_key(fp))


def buckets(g: BipartiteGraph, seed: int = 0, levels: int = 2) -> list[np.ndarray]:
    """Maximal runs of the shingle order sharing ``shingle1``."""
    fp = fingerprints(g, seed, levels)
    seq = _sort_key(fp)
    return _split_buckets(seq, fp)


def _split_buckets(seq, fp):
    s1 = fp.shingle1[seq]
    empty = (fp.degree == 0)[seq]
    cut = np.flatnonzero((s1[1:] != s1[:-1]) | (empty[1:] != empty[:-1])) + 1
    return np.split(seq, cut) if len(seq) else []


@njit(cache=True)
def _greedy_quadratic(indptr, indices, c):
    k = len(c)
    for i in range(1, k):
        prev = c[i - 1]
        best = -1.0
        jb = i
        for j in range(i, k):
            s = jaccard_csr(indptr, indices, prev, c[j])
            if s > best:
                best = s
                jb = j
        t = c[i]
        c[i] = c[jb]
        c[jb] = t
    return c


@njit(cache=True)
def _greedy_window(indptr, indices, c, window):
    """Algorithm-1 greedy where each step only scores the ``window`` unplaced
    vertices closest in degree to the last placed one."""
    k = len(c)
    deg = np.empty(k, dtype=np.int64)
    for t in range(k):
        deg[t] = indptr[c[t] + 1] - indptr[c[t]]
    # doubly-linked list over c-slots sorted by (degree, slot)
    by_deg = np.argsort(deg, kind="mergesort")
    nxt = np.full(k, -1, dtype=np.int64)
    prv = np.full(k, -1, dtype=np.int64)
    for r in range(k - 1):
        nxt[by_deg[r]] = by_deg[r + 1]
        prv[by_deg[r + 1]] = by_deg[r]
    # vertex stored in each slot, and slot of each original entry
    table = c.copy()
    where = np.arange(k)  # where[e] = current table index of entry e
    entry_at = np.arange(k)  # entry_at[i] = entry currently in table slot i
    cand = np.empty(window, dtype=np.int64)

    e0 = 0
    left = prv[e0]
    right = nxt[e0]
    if left >= 0:
        nxt[left] = right
    if right >= 0:
        prv[right] = left
    last = e0
    for i in range(1, k):
        d0 = deg[last]
        # gather closest-degree candidates, lower degree first on ties
        nc = 0
        lp = left
        rp = right
        while nc < window and (lp >= 0 or rp >= 0):
            if rp < 0 or (lp >= 0 and d0 - deg[lp] <= deg[rp] - d0):
                cand[nc] = lp
                lp = prv[lp]
            else:
                cand[nc] = rp
                rp = nxt[rp]
            nc += 1
        best = -1.0
        eb = -1
        pu = table[where[last]]
        for t in range(nc):
            e = cand[t]
            s = jaccard_csr(indptr, indices, pu, table[where[e]])
            if s > best or (s == best and where[e] < where[eb]):
                best = s
                eb = e
        # swap chosen entry into slot i
        si = where[eb]
        other = entry_at[i]
        vi = table[i]
        table[i] = table[si]
        table[si] = vi
        entry_at[i] = eb
        entry_at[si] = other
        where[eb] = i
        where[other] = si
        left = prv[eb]
        right = nxt[eb]
        if left >= 0:
            nxt[left] = right
        if right >= 0:
            prv[right] = left
        last = eb
    return table


@njit(cache=True)
def _simref_all(indptr, indices, seq, bounds, max_quadratic, window):
    out = seq.copy()
    for b in range(len(bounds) - 1):
        lo, hi = bounds[b], bounds[b + 1]
        if hi - lo < 3:
            # size 1 and 2 are fixed by the greedy rule
            continue
        chunk = out[lo:hi].copy()
        if hi - lo <= max_quadratic:
            res = _greedy_quadratic(indptr, indices, chunk)
        else:
            res = _greedy_window(indptr, indices, chunk, window)
        out[lo:hi] = res
    return out


def simref_bucket(g: BipartiteGraph, members, max_quadratic_bucket: int = 2048,
                  degree_window: int = 64) -> np.ndarray:
    """Order one bucket given in its initial (c-table) order."""
    c = np.asarray(members, dtype=INDEX_DTYPE).copy()
    if len(c) < 3:
        return c
    if len(c) <= max_quadratic_bucket:
        return _greedy_quadratic(g.indptr, g.indices, c)
    return _greedy_window(g.indptr, g.indices, c, max(1, degree_window))


def simref_order(g: BipartiteGraph, seed: int = 0, levels: int = 2,
                 max_quadratic_bucket: int = 2048, degree_window: int = 64) -> Ordering:
    """Shingle buckets, each reordered greedily so that every vertex is
    followed by the most Jaccard-similar remaining vertex of its bucket."""
    fp = fingerprints(g, seed, levels)
    seq = _sort_key(fp).astype(INDEX_DTYPE)
    parts = _split_buckets(seq, fp)
    bounds = np.zeros(len(parts) + 1, dtype=INDEX_DTYPE)
    np.cumsum([len(p) for p in parts], out=bounds[1:])
    out = _simref_all(g.indptr, g.indices, seq, bounds, max_quadratic_bucket, max(1, degree_window))
    return Ordering.from_sequence(out)
