"""Experimental referencing improvements.

* forest post-reordering: bottom vertices of one reference tree are given
  consecutive positions, which can only shrink reference offsets;
* forward referencing: a record may reference a successor, as long as the
  references stay acyclic; records are then written in a topological order
  and carry their own index.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .codec import (
    EncodedGraph,
    ReferenceForest,
    _record_cost,
    _select_backward,
    encode_with_references,
)
from .codes import CodeParams
from .graph import INDEX_DTYPE, BipartiteGraph, Ordering

NONE, BACKWARD, FORWARD = 0, 1, 2


def _roots(parent: np.ndarray) -> np.ndarray:
    n = len(parent)
    root = np.full(n, -1, dtype=INDEX_DTYPE)
    for v in range(n):
        path = []
        u = v
        while root[u] < 0 and parent[u] >= 0:
            path.append(u)
            if len(path) > n:
                raise ValueError("reference forest contains a cycle")
            u = parent[u]
        r = u if root[u] < 0 else root[u]
        root[u] = r
        for w in path:
            root[w] = r
    return root


def forest_layout(forest: ReferenceForest) -> np.ndarray:
    """New position sequence (old positions in new order) placing every tree
    contiguously.  Trees come in order of their smallest position; members
    keep their relative order, so no reference distance grows."""
    parent = np.asarray(forest.parent, dtype=INDEX_DTYPE)
    n = len(parent)
    if n == 0:
        return np.zeros(0, dtype=INDEX_DTYPE)
    root = _roots(parent)
    pos = np.arange(n, dtype=INDEX_DTYPE)
    first = np.full(n, n, dtype=INDEX_DTYPE)
    np.minimum.at(first, root, pos)
    return np.lexsort((pos, first[root]))


def forest_reorder(phi: Ordering, forest: ReferenceForest) -> Ordering:
    """Compose ``phi`` with the tree-contiguous layout of ``forest``.

    ``forest`` is indexed by ``phi`` positions, i.e. the ids of the graph the
    forest was extracted from.
    """
    if len(forest.parent) != len(phi):
        raise ValueError("forest and ordering sizes differ")
    seq = forest_layout(forest)
    relabel = np.empty(len(seq), dtype=INDEX_DTYPE)
    relabel[seq] = np.arange(len(seq), dtype=INDEX_DTYPE)
    return Ordering.from_perm(relabel[phi.perm])


def remap_forest(forest: ReferenceForest, seq: np.ndarray) -> ReferenceForest:
    """Express ``forest`` in the positions given by the layout ``seq``."""
    relabel = np.empty(len(seq), dtype=INDEX_DTYPE)
    relabel[seq] = np.arange(len(seq), dtype=INDEX_DTYPE)
    parent = np.full(len(seq), -1, dtype=INDEX_DTYPE)
    has = forest.parent >= 0
    parent[relabel[has.nonzero()[0]]] = relabel[forest.parent[has]]
    gain = np.empty_like(forest.gain)
    gain[relabel] = forest.gain
    return ReferenceForest(parent, gain)


def reference_gap_cost(parent) -> float:
    """Sum of log2 reference distances."""
    parent = np.asarray(parent)
    has = parent >= 0
    d = np.abs(np.flatnonzero(has) - parent[has])
    return float(np.sum(np.log2(d))) if len(d) else 0.0


@dataclass
class ReferenceDag:
    parent: np.ndarray       # reference of each bottom vertex, -1 for none
    direction: np.ndarray    # NONE / BACKWARD / FORWARD
    gain: np.ndarray         # bits saved by the accepted reference
    sequence: np.ndarray     # topological order: references before referrers

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(int(v), int(p)) for v, p in enumerate(self.parent) if p >= 0]


@njit(cache=True)
def _best_candidates(indptr, indices, window, kind, k):
    n = len(indptr) - 1
    target = np.full(n, -1, dtype=np.int64)
    gain = np.zeros(n, dtype=np.int64)
    for i in range(n):
        base = _record_cost(indptr, indices, i, -1, 0, True, kind, k)
        best = 0
        for x in range(1, 2 * window + 1):
            j = i - x if x <= window else i + (x - window)
            if j < 0 or j >= n:
                continue
            c = _record_cost(indptr, indices, i, j, x, True, kind, k)
            if base - c > best:
                best = base - c
                target[i] = j
        gain[i] = best
    return target, gain


def topological_sequence(parent) -> np.ndarray:
    """Bottom ids ordered so that every reference precedes its referrers;
    otherwise as close to id order as possible."""
    parent = np.asarray(parent)
    n = len(parent)
    emitted = np.zeros(n, dtype=bool)
    out = []
    for v in range(n):
        chain = []
        u = v
        while u >= 0 and not emitted[u]:
            chain.append(u)
            emitted[u] = True
            u = parent[u]
        out.extend(reversed(chain))
    return np.array(out, dtype=INDEX_DTYPE)


def forward_reference_select(g: BipartiteGraph, params: CodeParams | None = None,
                             forward: bool = True) -> ReferenceDag:
    """Choose at most one reference per bottom vertex among its ``window``
    predecessors and successors.

    Each vertex proposes its single best candidate by exact bit gain; the
    proposals are accepted in decreasing gain order unless they would close
    a cycle or create a chain longer than ``max_chain``.  With
    ``forward=False`` this is the codec's own backward selection.
    """
    params = params or CodeParams()
    n = g.n_bot
    kind, k = params.kind_id, params.k
    if not forward or not params.references:
        parent, _, cost, base = _select_backward(
            g.indptr, g.indices, params.window, params.max_chain, params.references, kind, k
        )
        direction = np.where(parent >= 0, BACKWARD, NONE).astype(np.int8)
        return ReferenceDag(parent, direction, base - cost, np.arange(n, dtype=INDEX_DTYPE))

    target, gain = _best_candidates(g.indptr, g.indices, params.window, kind, k)
    parent = np.full(n, -1, dtype=INDEX_DTYPE)
    height = np.zeros(n, dtype=INDEX_DTYPE)  # longest chain ending in each vertex
    L = params.max_chain
    order = np.lexsort((np.arange(n), -gain))
    for i in order:
        j = target[i]
        if j < 0:
            continue
        # walk up from j: detect a cycle through i and measure j's depth
        depth_j = 0
        u = j
        cyclic = False
        while parent[u] >= 0:
            if u == i:
                cyclic = True
                break
            u = parent[u]
            depth_j += 1
        if cyclic or u == i:
            continue
        if height[i] + 1 + depth_j > L:
            continue
        parent[i] = j
        h = height[i] + 1
        u = j
        while u >= 0 and height[u] < h:
            height[u] = h
            u = parent[u]
            h += 1
    has = parent >= 0
    direction = np.full(n, NONE, dtype=np.int8)
    direction[has & (parent < np.arange(n))] = BACKWARD
    direction[has & (parent > np.arange(n))] = FORWARD
    return ReferenceDag(parent, direction, np.where(has, gain, 0), topological_sequence(parent))


def encode_forward(g: BipartiteGraph, dag: ReferenceDag, params: CodeParams | None = None) -> EncodedGraph:
    """Write a forward-referencing stream following ``dag.sequence``."""
    return encode_with_references(g, dag.parent, params, sequence=dag.sequence, forward=True)
