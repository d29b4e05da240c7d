"""Lossless bitstream codec with backward referencing.

Record layout, one per bottom vertex in id order (the graph is expected to
be relabeled already)::

    [index]      gamma, forward streams only: bottom id of the record
    degree       gamma
    [ref]        gamma, only when window > 0 and max_chain > 0
                 backward: offset r in [0, W], 0 = no reference
                 forward: 1..W backward offset, W+1..2W forward offset + W
    [copy]       deg(reference) raw bits, 1 = neighbor shared with the reference
    residuals    first as x = value, then x = gap - 1, in the residual code

The residual count is ``degree - popcount(copy)`` and is not stored.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from numba import njit

from . import _bits
from .codes import CODE_KINDS, CodeParams, read_code
from .graph import INDEX_DTYPE, BipartiteGraph

MAGIC = b"BGC1"
_HEADER = struct.Struct("<4sQQQBBHB")
FLAG_FORWARD = 0x80
FLAG_TRANSPOSED = 0x40

_ERRORS = {
    1: "stream truncated",
    2: "copy-array length mismatch",
    3: "non-increasing residuals",
    4: "invalid reference offset",
    5: "neighbor id out of range",
    6: "edge count mismatch",
    7: "invalid record index",
    8: "reference chain too long",
    9: "trailing data after last record",
}


class CorruptStreamError(ValueError):
    def __init__(self, reason: str, record: int | None = None):
        self.reason = reason
        self.record = record
        where = f" at record {record}" if record is not None else ""
        super().__init__(f"corrupt stream{where}: {reason}")


# -- kernels ----------------------------------------------------------------

@njit(cache=True)
def _residual_bits(indptr, indices, i, j, kind, k):
    """Bits for the residuals of ``i`` against reference ``j`` (-1: none)."""
    cost = 0
    prev = -1
    a, a1 = indptr[i], indptr[i + 1]
    if j < 0:
        b = b1 = 0
    else:
        b, b1 = indptr[j], indptr[j + 1]
    while a < a1:
        x = indices[a]
        while b < b1 and indices[b] < x:
            b += 1
        if b < b1 and indices[b] == x:
            b += 1
        else:
            if prev < 0:
                cost += _bits.len_code(x, kind, k)
            else:
                cost += _bits.len_code(x - prev - 1, kind, k)
            prev = x
        a += 1
    return cost


@njit(cache=True)
def _record_cost(indptr, indices, i, j, code_x, refs, kind, k):
    # everything but the degree (and index) field
    cost = 0
    if refs:
        cost += _bits.len_code(code_x, _bits.GAMMA, 0)
    if j >= 0:
        cost += indptr[j + 1] - indptr[j]
    return cost + _residual_bits(indptr, indices, i, j, kind, k)


@njit(cache=True)
def _select_backward(indptr, indices, window, max_chain, refs, kind, k):
    n = len(indptr) - 1
    parent = np.full(n, -1, dtype=np.int64)
    code = np.zeros(n, dtype=np.int64)
    cost = np.zeros(n, dtype=np.int64)
    base = np.zeros(n, dtype=np.int64)
    depth = np.zeros(n, dtype=np.int64)
    for i in range(n):
        best = _record_cost(indptr, indices, i, -1, 0, refs, kind, k)
        base[i] = best
        bo = 0
        if refs:
            for r in range(1, min(window, i) + 1):
                j = i - r
                if depth[j] + 1 > max_chain:
                    continue
                lower = _bits.len_code(r, _bits.GAMMA, 0) + indptr[j + 1] - indptr[j]
                if lower >= best:
                    continue
                c = _record_cost(indptr, indices, i, j, r, refs, kind, k)
                if c < best:
                    best = c
                    bo = r
        cost[i] = best
        if bo > 0:
            parent[i] = i - bo
            code[i] = bo
            depth[i] = depth[i - bo] + 1
    return parent, code, cost, base


@njit(cache=True)
def _record_costs(indptr, indices, parent, code, refs, kind, k):
    n = len(indptr) - 1
    cost = np.zeros(n, dtype=np.int64)
    base = np.zeros(n, dtype=np.int64)
    for i in range(n):
        base[i] = _record_cost(indptr, indices, i, -1, 0, refs, kind, k)
        if parent[i] >= 0:
            cost[i] = _record_cost(indptr, indices, i, parent[i], code[i], refs, kind, k)
        else:
            cost[i] = base[i]
    return cost, base


@njit(cache=True)
def _write_stream(indptr, indices, seq, parent, code, cost, forward, refs, kind, k):
    total = 0
    for i in seq:
        total += cost[i] + _bits.len_code(indptr[i + 1] - indptr[i], _bits.GAMMA, 0)
        if forward:
            total += _bits.len_code(i, _bits.GAMMA, 0)
    buf = np.zeros(total, dtype=np.uint8)
    pos = 0
    for i in seq:
        if forward:
            pos = _bits.write_code(buf, pos, i, _bits.GAMMA, 0)
        pos = _bits.write_code(buf, pos, indptr[i + 1] - indptr[i], _bits.GAMMA, 0)
        if refs:
            pos = _bits.write_code(buf, pos, code[i], _bits.GAMMA, 0)
        j = parent[i]
        a, a1 = indptr[i], indptr[i + 1]
        prev = -1
        if j >= 0:
            # copy bits, then residuals from a second merge
            aa = a
            for b in range(indptr[j], indptr[j + 1]):
                y = indices[b]
                while aa < a1 and indices[aa] < y:
                    aa += 1
                if aa < a1 and indices[aa] == y:
                    buf[pos] = 1
                else:
                    buf[pos] = 0
                pos += 1
            b, b1 = indptr[j], indptr[j + 1]
        else:
            b = b1 = 0
        while a < a1:
            x = indices[a]
            while b < b1 and indices[b] < x:
                b += 1
            if b < b1 and indices[b] == x:
                b += 1
            else:
                if prev < 0:
                    pos = _bits.write_code(buf, pos, x, kind, k)
                else:
                    pos = _bits.write_code(buf, pos, x - prev - 1, kind, k)
                prev = x
            a += 1
    return buf


@njit(cache=True)
def _decode(buf, n_top, n_bot, m, window, max_chain, forward, refs, kind, k):
    nbits = len(buf)
    deg = np.zeros(n_bot, dtype=np.int64)
    start = np.zeros(n_bot, dtype=np.int64)
    done = np.zeros(n_bot, dtype=np.bool_)
    depth = np.zeros(n_bot, dtype=np.int64)
    parent = np.full(n_bot, -1, dtype=np.int64)
    code = np.zeros(n_bot, dtype=np.int64)
    seq = np.zeros(n_bot, dtype=np.int64)
    tmp = np.zeros(m, dtype=np.int64)
    copied = np.zeros(n_top + 1, dtype=np.int64)
    resid = np.zeros(n_top + 1, dtype=np.int64)
    fill = 0
    pos = 0
    empty = np.zeros(0, dtype=np.int64)
    for rec in range(n_bot):
        if forward:
            idx, pos = _bits.read_code(buf, pos, nbits, _bits.GAMMA, 0)
            if pos < 0:
                return 1, rec, pos, empty, empty, parent, code, seq
            if idx >= n_bot or done[idx]:
                return 7, rec, pos, empty, empty, parent, code, seq
        else:
            idx = rec
        d, pos = _bits.read_code(buf, pos, nbits, _bits.GAMMA, 0)
        if pos < 0:
            return 1, idx, pos, empty, empty, parent, code, seq
        if fill + d > m or d > n_top:
            return 6, idx, pos, empty, empty, parent, code, seq
        x = 0
        if refs:
            x, pos = _bits.read_code(buf, pos, nbits, _bits.GAMMA, 0)
            if pos < 0:
                return 1, idx, pos, empty, empty, parent, code, seq
        n_copy = 0
        if x > 0:
            if not forward:
                if x > window or x > idx:
                    return 4, idx, pos, empty, empty, parent, code, seq
                j = idx - x
            else:
                if x <= window:
                    j = idx - x
                elif x <= 2 * window:
                    j = idx + (x - window)
                else:
                    return 4, idx, pos, empty, empty, parent, code, seq
                if j < 0 or j >= n_bot or not done[j]:
                    return 4, idx, pos, empty, empty, parent, code, seq
            if depth[j] + 1 > max_chain:
                return 8, idx, pos, empty, empty, parent, code, seq
            dj = deg[j]
            if pos + dj > nbits:
                return 1, idx, -1, empty, empty, parent, code, seq
            s = start[j]
            for t in range(dj):
                if buf[pos + t] == 1:
                    copied[n_copy] = tmp[s + t]
                    n_copy += 1
            pos += dj
            if n_copy > d:
                return 2, idx, pos, empty, empty, parent, code, seq
            parent[idx] = j
            code[idx] = x
            depth[idx] = depth[j] + 1
        n_res = d - n_copy
        prev = -1
        for t in range(n_res):
            v, pos = _bits.read_code(buf, pos, nbits, kind, k)
            if pos < 0:
                return 1, idx, pos, empty, empty, parent, code, seq
            if prev < 0:
                val = v
            else:
                val = prev + v + 1
            if val >= n_top:
                return 5, idx, pos, empty, empty, parent, code, seq
            resid[t] = val
            prev = val
        # merge copied + residuals
        a = 0
        b = 0
        last = -1
        start[idx] = fill
        while a < n_copy or b < n_res:
            if b >= n_res or (a < n_copy and copied[a] < resid[b]):
                val = copied[a]
                a += 1
            else:
                val = resid[b]
                b += 1
            if val <= last:
                return 3, idx, pos, empty, empty, parent, code, seq
            tmp[fill] = val
            fill += 1
            last = val
        deg[idx] = d
        done[idx] = True
        seq[rec] = idx
    if fill != m:
        return 6, -1, pos, empty, empty, parent, code, seq
    rest = nbits - pos
    if rest >= 8:
        return 9, -1, pos, empty, empty, parent, code, seq
    for t in range(pos, nbits):
        if buf[t] != 0:
            return 9, -1, pos, empty, empty, parent, code, seq
    indptr = np.zeros(n_bot + 1, dtype=np.int64)
    for i in range(n_bot):
        indptr[i + 1] = indptr[i] + deg[i]
    indices = np.empty(m, dtype=np.int64)
    for i in range(n_bot):
        s = start[i]
        o = indptr[i]
        for t in range(deg[i]):
            indices[o + t] = tmp[s + t]
    return 0, -1, pos, indptr, indices, parent, code, seq


# -- public types -------------------------------------------------------------

@dataclass(eq=False)
class EncodedGraph:
    n_top: int
    n_bot: int
    m: int
    params: CodeParams
    payload: bytes
    n_bits: int
    forward: bool = False
    transposed: bool = False
    parent: np.ndarray | None = field(default=None, repr=False)
    ref_code: np.ndarray | None = field(default=None, repr=False)
    gain: np.ndarray | None = field(default=None, repr=False)
    sequence: np.ndarray | None = field(default=None, repr=False)

    @property
    def bits_per_edge(self) -> float:
        return self.n_bits / self.m if self.m else 0.0

    @property
    def offsets(self) -> np.ndarray:
        """Signed reference distance per record: ``i - parent[i]``, 0 if none."""
        self._ensure_scanned()
        idx = np.arange(self.n_bot, dtype=INDEX_DTYPE)
        return np.where(self.parent >= 0, idx - self.parent, 0)

    def _ensure_scanned(self) -> None:
        if self.parent is None:
            decode_graph(self)

    def header_bytes(self) -> bytes:
        flags = self.params.kind_id
        if self.forward:
            flags |= FLAG_FORWARD
        if self.transposed:
            flags |= FLAG_TRANSPOSED
        p = self.params
        return _HEADER.pack(MAGIC, self.n_top, self.n_bot, self.m, flags, p.k, p.window, p.max_chain)

    def to_bytes(self) -> bytes:
        return self.header_bytes() + self.payload

    @classmethod
    def from_bytes(cls, data: bytes) -> "EncodedGraph":
        if len(data) < _HEADER.size:
            raise CorruptStreamError("truncated header")
        magic, n_top, n_bot, m, flags, k, window, max_chain = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise CorruptStreamError("bad magic, not a BGC1 stream")
        kind = flags & 0x0F
        if kind >= len(CODE_KINDS):
            raise CorruptStreamError(f"unknown code kind {kind}")
        try:
            params = CodeParams(CODE_KINDS[kind], max(k, 1), window, max_chain)
        except ValueError as exc:
            raise CorruptStreamError(str(exc)) from None
        payload = bytes(data[_HEADER.size:])
        return cls(n_top, n_bot, m, params, payload, 8 * len(payload),
                   forward=bool(flags & FLAG_FORWARD), transposed=bool(flags & FLAG_TRANSPOSED))


@dataclass
class ReferenceForest:
    """``parent[q]`` is the reference of bottom ``q`` (-1 for none);
    ``gain[q]`` the bits saved against encoding ``q`` without reference."""

    parent: np.ndarray
    gain: np.ndarray

    def roots(self) -> np.ndarray:
        return np.flatnonzero(self.parent < 0)

    def depth(self) -> np.ndarray:
        n = len(self.parent)
        depth = np.full(n, -1, dtype=INDEX_DTYPE)
        for v in range(n):
            path = []
            u = v
            while u >= 0 and depth[u] < 0:
                path.append(u)
                if len(path) > n:
                    raise ValueError("reference structure contains a cycle")
                u = self.parent[u]
            d = -1 if u < 0 else depth[u]
            for w in reversed(path):
                d += 1
                depth[w] = d
        return depth

    def is_acyclic(self) -> bool:
        try:
            self.depth()
        except ValueError:
            return False
        return True


# -- public operations --------------------------------------------------------

def _kernel_params(params: CodeParams):
    return params.kind_id, params.k, params.references


def _pack(bits: np.ndarray) -> bytes:
    return np.packbits(bits).tobytes()


def encode_graph(g: BipartiteGraph, params: CodeParams | None = None) -> EncodedGraph:
    """Encode the (relabeled) graph with backward referencing.

    Every reference candidate within the window whose chain stays within
    ``max_chain`` is costed in exact bits, as is the no-reference option;
    the cheapest wins, ties going to no reference and then the smallest
    offset.
    """
    params = params or CodeParams()
    kind, k, refs = _kernel_params(params)
    parent, code, cost, base = _select_backward(
        g.indptr, g.indices, params.window, params.max_chain, refs, kind, k
    )
    seq = np.arange(g.n_bot, dtype=INDEX_DTYPE)
    bits = _write_stream(g.indptr, g.indices, seq, parent, code, cost, False, refs, kind, k)
    return EncodedGraph(
        g.n_top, g.n_bot, g.m, params, _pack(bits), len(bits),
        parent=parent, ref_code=code, gain=base - cost, sequence=seq,
    )


def encode_with_references(g: BipartiteGraph, parent, params: CodeParams | None = None,
                           sequence=None, forward: bool = False) -> EncodedGraph:
    """Encode using a caller-chosen reference for every record.

    With ``forward`` the records are written in ``sequence`` (which must
    list every reference before its referrers) and carry their index.
    """
    params = params or CodeParams()
    kind, k, refs = _kernel_params(params)
    n = g.n_bot
    parent = np.asarray(parent, dtype=INDEX_DTYPE)
    if len(parent) != n:
        raise ValueError("parent array does not match the number of bottom vertices")
    idx = np.arange(n, dtype=INDEX_DTYPE)
    has = parent >= 0
    if has.any() and not refs:
        raise ValueError("references are disabled by window/max_chain")
    dist = idx - parent
    W = params.window
    if forward:
        code = np.where(dist > 0, dist, W - dist)
        bad = has & ((dist == 0) | (np.abs(dist) > W))
    else:
        code = dist
        bad = has & ((dist <= 0) | (dist > W))
    if bad.any():
        raise ValueError(f"reference of record {int(np.flatnonzero(bad)[0])} is outside the window")
    code = np.where(has, code, 0)
    depth = ReferenceForest(parent, np.zeros(n)).depth()
    if n and depth.max() > params.max_chain:
        raise ValueError("reference chain exceeds max_chain")
    if sequence is None:
        sequence = idx
    sequence = np.asarray(sequence, dtype=INDEX_DTYPE)
    seen = np.zeros(n, dtype=bool)
    for i in sequence:
        if has[i] and not seen[parent[i]]:
            raise ValueError("sequence places a record before its reference")
        seen[i] = True
    if not forward and not np.array_equal(sequence, idx):
        raise ValueError("backward streams are written in id order")
    cost, base = _record_costs(g.indptr, g.indices, parent, code, refs, kind, k)
    bits = _write_stream(g.indptr, g.indices, sequence, parent, code, cost, forward, refs, kind, k)
    return EncodedGraph(
        g.n_top, g.n_bot, g.m, params, _pack(bits), len(bits), forward=forward,
        parent=parent, ref_code=code, gain=base - cost, sequence=sequence,
    )


def decode_graph(e: EncodedGraph) -> BipartiteGraph:
    """Reconstruct the graph; raises :class:`CorruptStreamError` naming the
    failing record on malformed input."""
    p = e.params
    kind, k, refs = _kernel_params(p)
    buf = np.unpackbits(np.frombuffer(e.payload, dtype=np.uint8))
    status, rec, _, indptr, indices, parent, code, seq = _decode(
        buf, e.n_top, e.n_bot, e.m, p.window, p.max_chain, e.forward, refs, kind, k
    )
    if status:
        raise CorruptStreamError(_ERRORS[status], None if rec < 0 else int(rec))
    g = BipartiteGraph(e.n_top, e.n_bot, indptr, indices, validate=False)
    if e.parent is None:
        cost, base = _record_costs(g.indptr, g.indices, parent, code, refs, kind, k)
        e.parent, e.ref_code, e.gain, e.sequence = parent, code, base - cost, seq
    return g


def extract_reference_forest(e: EncodedGraph) -> ReferenceForest:
    e._ensure_scanned()
    forest = ReferenceForest(e.parent.copy(), e.gain.copy())
    if not forest.is_acyclic():
        raise CorruptStreamError("references form a cycle")
    return forest


def residual_values(neighbors, reference=()) -> list[int]:
    """Integers (all >= 1) stored for the residuals of ``neighbors``:
    the first residual plus one, then successive differences."""
    ref = set(reference)
    out = []
    prev = None
    for x in neighbors:
        if x in ref:
            continue
        out.append(x + 1 if prev is None else x - prev)
        prev = x
    return out


@dataclass
class Record:
    index: int
    degree: int
    ref_code: int
    copy: list[int]
    residuals: list[int]


def iter_records(e: EncodedGraph) -> Iterator[Record]:
    """Walk the payload with the string-based reference codes.

    Slow; meant for inspection and for cross-checking the compiled decoder.
    The reference of a record must be known to size its copy array, so
    degrees are tracked as records are read.
    """
    p = e.params
    bits = "".join(format(b, "08b") for b in e.payload)[: e.n_bits]
    pos = 0
    degree: dict[int, int] = {}
    W = p.window
    for rec in range(e.n_bot):
        if e.forward:
            idx, pos = read_code(bits, pos, "gamma")
        else:
            idx = rec
        d, pos = read_code(bits, pos, "gamma")
        x = 0
        if p.references:
            x, pos = read_code(bits, pos, "gamma")
        copy: list[int] = []
        if x:
            j = idx - x if (not e.forward or x <= W) else idx + (x - W)
            dj = degree[j]
            copy = [int(c) for c in bits[pos:pos + dj]]
            pos += dj
        residuals = []
        for _ in range(d - sum(copy)):
            v, pos = read_code(bits, pos, p)
            residuals.append(v + 1)
        degree[idx] = d
        yield Record(idx, d, x, copy, residuals)
