"""Bipartite graph container, orderings and edge-list / binary-cache I/O.

Every bottom vertex (a "query") stores the ascending list of its top
neighbors (the "data").  Ids are dense per side: tops in ``[0, n_top)``,
bottoms in ``[0, n_bot)``.  Adjacency is kept in CSR form.
"""
from __future__ import annotations

import io
import os
import struct
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Sequence

import numpy as np

CACHE_MAGIC = b"BGZ1"
INDEX_DTYPE = np.int64


class GraphError(ValueError):
    pass


class GraphFormatError(GraphError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyGraphError(GraphError):
    pass


class DimensionError(GraphError):
    pass


def _frozen(a) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=INDEX_DTYPE)
    a.setflags(write=False)
    return a


class BipartiteGraph:
    """Immutable bipartite graph in CSR form, indexed by bottom vertex."""

    __slots__ = ("n_top", "n_bot", "indptr", "indices")

    def __init__(self, n_top: int, n_bot: int, indptr, indices, validate: bool = True):
        indptr = _frozen(indptr)
        indices = _frozen(indices)
        object.__setattr__(self, "n_top", int(n_top))
        object.__setattr__(self, "n_bot", int(n_bot))
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)
        if validate:
            self._validate()

    def __setattr__(self, name, value):
        raise AttributeError("BipartiteGraph is immutable")

    def _validate(self) -> None:
        if self.n_top < 0 or self.n_bot < 0:
            raise DimensionError("vertex counts must be non-negative")
        if self.indptr.shape != (self.n_bot + 1,):
            raise DimensionError(f"indptr has length {len(self.indptr)}, expected {self.n_bot + 1}")
        if self.indptr[0] != 0 or self.indptr[-1] != len(self.indices):
            raise GraphError("indptr does not span indices")
        if np.any(np.diff(self.indptr) < 0):
            raise GraphError("indptr must be non-decreasing")
        if len(self.indices):
            if self.indices.min() < 0 or self.indices.max() >= self.n_top:
                raise GraphError("neighbor id out of range")
            # strictly increasing inside every list
            step = np.diff(self.indices)
            heads = np.zeros(len(self.indices), dtype=bool)
            heads[self.indptr[:-1][np.diff(self.indptr) > 0]] = True
            if np.any(step[~heads[1:]] <= 0):
                raise GraphError("adjacency lists must be strictly increasing")

    @classmethod
    def from_edges(cls, bot, top, n_bot: int | None = None, n_top: int | None = None) -> "BipartiteGraph":
        """Build from parallel arrays of dense (bot, top) ids; duplicates are collapsed."""
        bot = np.asarray(bot, dtype=INDEX_DTYPE)
        top = np.asarray(top, dtype=INDEX_DTYPE)
        if bot.shape != top.shape:
            raise DimensionError("bot and top arrays differ in length")
        if n_bot is None:
            n_bot = int(bot.max()) + 1 if len(bot) else 0
        if n_top is None:
            n_top = int(top.max()) + 1 if len(top) else 0
        if len(bot) and (bot.min() < 0 or bot.max() >= n_bot or top.min() < 0 or top.max() >= n_top):
            raise GraphError("edge endpoint out of range")
        keys = np.unique(bot * max(n_top, 1) + top)
        b = keys // max(n_top, 1)
        t = keys % max(n_top, 1)
        indptr = np.zeros(n_bot + 1, dtype=INDEX_DTYPE)
        np.cumsum(np.bincount(b, minlength=n_bot), out=indptr[1:])
        return cls(n_top, n_bot, indptr, t, validate=False)

    @classmethod
    def from_adjacency(cls, adj: Sequence[Iterable[int]], n_top: int | None = None) -> "BipartiteGraph":
        bot, top = [], []
        for q, nbrs in enumerate(adj):
            for t in nbrs:
                bot.append(q)
                top.append(t)
        return cls.from_edges(bot, top, n_bot=len(adj), n_top=n_top)

    @classmethod
    def empty(cls) -> "BipartiteGraph":
        return cls(0, 0, [0], [], validate=False)

    @property
    def m(self) -> int:
        return len(self.indices)

    def neighbors(self, q: int) -> np.ndarray:
        return self.indices[self.indptr[q]:self.indptr[q + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def top_degrees(self) -> np.ndarray:
        return np.bincount(self.indices, minlength=self.n_top)

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Return the (bot, top) arrays of all edges in CSR order."""
        bot = np.repeat(np.arange(self.n_bot, dtype=INDEX_DTYPE), self.degrees())
        return bot, self.indices.copy()

    def adjacency(self) -> list[list[int]]:
        return [self.neighbors(q).tolist() for q in range(self.n_bot)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return (
            self.n_top == other.n_top
            and self.n_bot == other.n_bot
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"BipartiteGraph(n_top={self.n_top}, n_bot={self.n_bot}, m={self.m})"


@dataclass(frozen=True, eq=False)
class Ordering:
    """Bijection vertex -> position.  ``perm[v]`` is the position of ``v``,
    ``inv[p]`` the vertex at position ``p``."""

    perm: np.ndarray
    inv: np.ndarray

    @classmethod
    def from_perm(cls, perm) -> "Ordering":
        perm = np.asarray(perm, dtype=INDEX_DTYPE)
        n = len(perm)
        inv = np.full(n, -1, dtype=INDEX_DTYPE)
        if n and (perm.min() < 0 or perm.max() >= n):
            raise ValueError("ordering positions out of range")
        inv[perm] = np.arange(n, dtype=INDEX_DTYPE)
        if np.any(inv < 0):
            raise ValueError("ordering is not a bijection")
        return cls(_frozen(perm), _frozen(inv))

    @classmethod
    def from_sequence(cls, inv) -> "Ordering":
        """Build from the list of vertices in position order."""
        inv = np.asarray(inv, dtype=INDEX_DTYPE)
        n = len(inv)
        perm = np.full(n, -1, dtype=INDEX_DTYPE)
        if n and (inv.min() < 0 or inv.max() >= n):
            raise ValueError("vertex id out of range")
        perm[inv] = np.arange(n, dtype=INDEX_DTYPE)
        if np.any(perm < 0):
            raise ValueError("sequence is not a permutation")
        return cls(_frozen(perm), _frozen(inv))

    def __len__(self) -> int:
        return len(self.perm)

    def reversed(self) -> "Ordering":
        n = len(self.perm)
        return Ordering.from_perm(n - 1 - self.perm)

    def compose(self, then: "Ordering") -> "Ordering":
        """Relabel positions of ``self`` through ``then``."""
        return Ordering.from_perm(then.perm[self.perm])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Ordering):
            return NotImplemented
        return np.array_equal(self.perm, other.perm)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        head = ", ".join(map(str, self.perm[:8].tolist()))
        return f"Ordering(n={len(self)}, perm=[{head}{', ...' if len(self) > 8 else ''}])"


def identity_ordering(n: int) -> Ordering:
    return Ordering.from_perm(np.arange(n, dtype=INDEX_DTYPE))


def random_ordering(n: int, seed: int) -> Ordering:
    rng = np.random.default_rng(np.uint64(seed % 2**64))
    return Ordering.from_perm(rng.permutation(n))


def is_bijection(perm) -> bool:
    perm = np.asarray(perm)
    n = len(perm)
    return bool(n == 0 or (perm.min() >= 0 and perm.max() < n and len(np.unique(perm)) == n))


def transpose(g: BipartiteGraph) -> BipartiteGraph:
    """Exchange the roles of the two vertex sets."""
    bot, top = g.edges()
    order = np.lexsort((bot, top))
    indptr = np.zeros(g.n_top + 1, dtype=INDEX_DTYPE)
    np.cumsum(np.bincount(top, minlength=g.n_top), out=indptr[1:])
    return BipartiteGraph(g.n_bot, g.n_top, indptr, bot[order], validate=False)


def apply_orderings(g: BipartiteGraph, pi: Ordering, phi: Ordering) -> BipartiteGraph:
    """Relabel each vertex to its position: top ``t`` -> ``pi.perm[t]``,
    bottom ``q`` -> ``phi.perm[q]``."""
    if len(pi) != g.n_top or len(phi) != g.n_bot:
        raise DimensionError(
            f"orderings of size ({len(pi)}, {len(phi)}) do not match graph ({g.n_top}, {g.n_bot})"
        )
    bot, top = g.edges()
    nb = phi.perm[bot]
    nt = pi.perm[top]
    order = np.lexsort((nt, nb))
    indptr = np.zeros(g.n_bot + 1, dtype=INDEX_DTYPE)
    np.cumsum(np.bincount(nb, minlength=g.n_bot), out=indptr[1:])
    return BipartiteGraph(g.n_top, g.n_bot, indptr, nt[order], validate=False)


def _densify(ids: np.ndarray) -> tuple[np.ndarray, int]:
    """Map raw ids to 0..k-1 by order of first appearance."""
    uniq, first, inverse = np.unique(ids, return_index=True, return_inverse=True)
    rank = np.empty(len(uniq), dtype=INDEX_DTYPE)
    rank[np.argsort(first, kind="stable")] = np.arange(len(uniq), dtype=INDEX_DTYPE)
    return rank[inverse.ravel()], len(uniq)


def parse_edge_list(lines: Iterable[str | bytes]) -> tuple[np.ndarray, np.ndarray]:
    """Parse ``bot top`` records, skipping blank and ``%``/``#`` comment lines.

    Extra columns (KONECT weights and timestamps) are ignored.
    """
    bot: list[int] = []
    top: list[int] = []
    for lineno, line in enumerate(lines, 1):
        if isinstance(line, bytes):
            line = line.decode("utf-8", errors="replace")
        s = line.strip()
        if not s or s[0] in "%#":
            continue
        parts = s.split()
        if len(parts) < 2:
            raise GraphFormatError(f"expected two integers, got {s!r}", lineno)
        try:
            b, t = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"non-integer vertex id in {s!r}", lineno) from None
        if b < 0 or t < 0:
            raise GraphFormatError(f"negative vertex id in {s!r}", lineno)
        bot.append(b)
        top.append(t)
    return np.array(bot, dtype=INDEX_DTYPE), np.array(top, dtype=INDEX_DTYPE)


def load_edge_list(source) -> BipartiteGraph:
    """Load a text edge list from a path, a text/binary stream or an iterable of lines.

    Ids are densified per side in order of first appearance, duplicate
    edges are removed and adjacency lists sorted.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            bot, top = parse_edge_list(fh)
    else:
        bot, top = parse_edge_list(source)
    if len(bot) == 0:
        raise EmptyGraphError("edge list contains no edges")
    b, n_bot = _densify(bot)
    t, n_top = _densify(top)
    return BipartiteGraph.from_edges(b, t, n_bot=n_bot, n_top=n_top)


def write_edge_list(g: BipartiteGraph, fh) -> None:
    bot, top = g.edges()
    for b, t in zip(bot.tolist(), top.tolist()):
        fh.write(f"{b} {t}\n")


# -- binary cache -----------------------------------------------------------

def dump_cache(g: BipartiteGraph) -> bytes:
    """Serialize to the ``BGZ1`` cache layout (little-endian)."""
    if g.n_top > 2**32 or g.n_bot > 2**32:
        raise DimensionError("graph too large for 32-bit cache ids")
    out = io.BytesIO()
    out.write(CACHE_MAGIC)
    out.write(struct.pack("<QQQ", g.n_top, g.n_bot, g.m))
    out.write(g.degrees().astype("<u4").tobytes())
    out.write(g.indices.astype("<u4").tobytes())
    return out.getvalue()


def load_cache(data: bytes | BinaryIO) -> BipartiteGraph:
    if not isinstance(data, (bytes, bytearray, memoryview)):
        data = data.read()
    data = bytes(data)
    if data[:4] != CACHE_MAGIC:
        raise GraphFormatError("not a BGZ1 cache file")
    if len(data) < 28:
        raise GraphFormatError("truncated cache header")
    n_top, n_bot, m = struct.unpack_from("<QQQ", data, 4)
    expected = 28 + 4 * n_bot + 4 * m
    if len(data) != expected:
        raise GraphFormatError(f"cache size {len(data)} does not match header ({expected})")
    deg = np.frombuffer(data, dtype="<u4", count=n_bot, offset=28).astype(INDEX_DTYPE)
    idx = np.frombuffer(data, dtype="<u4", count=m, offset=28 + 4 * n_bot).astype(INDEX_DTYPE)
    indptr = np.zeros(n_bot + 1, dtype=INDEX_DTYPE)
    np.cumsum(deg, out=indptr[1:])
    if indptr[-1] != m:
        raise GraphFormatError("degree array does not sum to m")
    return BipartiteGraph(n_top, n_bot, indptr, idx)


def read_graph(path) -> BipartiteGraph:
    """Load either a ``BGZ1`` cache or a text edge list, detected by magic."""
    with open(path, "rb") as fh:
        head = fh.read(4)
        fh.seek(0)
        if head == CACHE_MAGIC:
            return load_cache(fh)
        return load_edge_list(io.TextIOWrapper(fh, encoding="utf-8", errors="replace"))


def read_ordering(path, n: int | None = None) -> Ordering:
    """Read a position file: line ``i`` holds the position of vertex ``i``."""
    with open(path) as fh:
        perm = [int(s) for s in fh.read().split()]
    if n is not None and len(perm) != n:
        raise DimensionError(f"{path}: ordering has {len(perm)} entries, expected {n}")
    return Ordering.from_perm(perm)


def write_ordering(order: Ordering, path) -> None:
    with open(path, "w") as fh:
        fh.write("".join(f"{p}\n" for p in order.perm.tolist()))
