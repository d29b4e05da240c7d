"""Synthetic bipartite graphs with planted structure, for tests and benches."""
from __future__ import annotations

import numpy as np

from .graph import BipartiteGraph


def random_bipartite(n_top: int, n_bot: int, m: int, seed: int = 0) -> BipartiteGraph:
    """Up to ``m`` uniformly random edges (duplicates collapse)."""
    rng = np.random.default_rng(seed)
    if n_top == 0 or n_bot == 0:
        m = 0
    bot = rng.integers(0, max(n_bot, 1), size=m)
    top = rng.integers(0, max(n_top, 1), size=m)
    return BipartiteGraph.from_edges(bot, top, n_bot=n_bot, n_top=n_top)


def planted_blocks(n_blocks: int = 20, block_size: int = 50, queries_per_block: int = 30,
                   degree: int = 8, seed: int = 0, shuffle: bool = True) -> BipartiteGraph:
    """Top vertices split into blocks; each bottom vertex draws ``degree``
    distinct neighbors from a single block.  Ids on both sides are shuffled
    unless ``shuffle`` is false."""
    rng = np.random.default_rng(seed)
    n_top = n_blocks * block_size
    degree = min(degree, block_size)
    top_perm = rng.permutation(n_top) if shuffle else np.arange(n_top)
    adj = []
    for b in range(n_blocks):
        for _ in range(queries_per_block):
            members = rng.choice(block_size, size=degree, replace=False) + b * block_size
            adj.append(np.sort(top_perm[members]))
    if shuffle:
        adj = [adj[i] for i in rng.permutation(len(adj))]
    return BipartiteGraph.from_adjacency(adj, n_top)


def planted_duplicates(n_groups: int = 100, group_size: int = 2, n_top: int = 2000,
                       degree: int = 12, noise: float = 0.0, seed: int = 0,
                       return_groups: bool = False):
    """Groups of bottom vertices sharing one random neighborhood, scattered
    through the id space.  With ``noise > 0`` every member swaps that
    fraction of its neighbors for random ones.

    With ``return_groups`` the group label of every bottom id is returned too.
    """
    rng = np.random.default_rng(seed)
    adj = []
    for _ in range(n_groups):
        base = rng.choice(n_top, size=degree, replace=False)
        for _ in range(group_size):
            nb = base.copy()
            if noise > 0:
                mask = rng.random(degree) < noise
                nb[mask] = rng.integers(0, n_top, size=int(mask.sum()))
            adj.append(np.unique(nb))
    order = rng.permutation(len(adj))
    g = BipartiteGraph.from_adjacency([adj[i] for i in order], n_top)
    if return_groups:
        return g, order // group_size
    return g


def jaccard_pair(j: float, union: int = 100, offset: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Two id sets whose Jaccard index is exactly ``round(j * union) / union``
    (the overlap is rounded to keep both sets equally sized)."""
    inter = int(round(j * union))
    if (union + inter) % 2:
        inter -= 1
    size = (union + inter) // 2
    a = np.arange(size) + offset
    b = np.arange(size - inter, union) + offset
    return a, b
