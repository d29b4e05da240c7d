"""Ordering pipelines and the method comparison bench.

A method turns a graph into a pair of orderings (pi for tops, phi for
bottoms).  ``run_method`` relabels, encodes and checks the roundtrip.
"""
from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .codec import (
    EncodedGraph,
    decode_graph,
    encode_graph,
    encode_with_references,
    extract_reference_forest,
)
from .codes import CodeParams
from .extensions import encode_forward, forest_layout, forward_reference_select, remap_forest
from .graph import BipartiteGraph, Ordering, apply_orderings, identity_ordering, random_ordering, transpose
from .objective import adjacent_jaccard, bim_log_gap
from .recbis import RecBisParams, recbis_order, recbis_unipartite
from .shingle import shingle_order, simref_order

METHODS = ("natural", "random", "shingle", "simref", "recbis-u", "recbis-b", "dual")


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    code: CodeParams = field(default_factory=CodeParams)
    recbis: RecBisParams = field(default_factory=RecBisParams)
    levels: int = 2
    max_quadratic_bucket: int = 2048
    degree_window: int = 64
    post_forest_reorder: bool = False
    forward_refs: bool = False

    @property
    def recbis_params(self) -> RecBisParams:
        return replace(self.recbis, seed=self.seed)


def _timed(timings: dict, name: str, fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    timings[name] = timings.get(name, 0.0) + time.perf_counter() - t0
    return out


def order_graph(g: BipartiteGraph, method: str, cfg: PipelineConfig | None = None,
                timings: dict | None = None) -> tuple[Ordering, Ordering]:
    """Orderings ``(pi, phi)`` of ``g`` produced by ``method``."""
    cfg = cfg or PipelineConfig()
    timings = {} if timings is None else timings
    rp = cfg.recbis_params
    shingle_kw = dict(seed=cfg.seed, levels=cfg.levels)
    simref_kw = dict(shingle_kw, max_quadratic_bucket=cfg.max_quadratic_bucket,
                     degree_window=cfg.degree_window)
    if method == "natural":
        return identity_ordering(g.n_top), identity_ordering(g.n_bot)
    if method == "random":
        pi = random_ordering(g.n_top, cfg.seed)
        return pi, random_ordering(g.n_bot, cfg.seed + 1)
    if method == "recbis-u":
        return _timed(timings, "order_union", recbis_unipartite, g, rp)
    if method in ("shingle", "dual", "recbis-b"):
        pi = _timed(timings, "order_top", recbis_order, g, "top", rp)
    else:
        pi = identity_ordering(g.n_top)
    if method == "shingle":
        phi = _timed(timings, "order_bottom", shingle_order, g, **shingle_kw)
    elif method in ("simref", "dual"):
        phi = _timed(timings, "order_bottom", simref_order, g, **simref_kw)
    elif method == "recbis-b":
        phi = _timed(timings, "order_bottom", recbis_order, g, "bottom", rp)
    else:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    return pi, phi


def encode_relabeled(h: BipartiteGraph, cfg: PipelineConfig) -> tuple[EncodedGraph, Ordering | None]:
    """Encode an already relabeled graph, applying the optional extensions.

    Returns the stream and, when forest post-reordering moved bottom
    vertices, the extra relabeling applied to them.
    """
    e = encode_graph(h, cfg.code)
    extra = None
    if cfg.post_forest_reorder and cfg.code.references:
        forest = extract_reference_forest(e)
        seq = forest_layout(forest)
        extra = Ordering.from_sequence(seq)
        h = apply_orderings(h, identity_ordering(h.n_top), extra)
        e = encode_with_references(h, remap_forest(forest, seq).parent, cfg.code)
    if cfg.forward_refs and cfg.code.references:
        e = encode_forward(h, forward_reference_select(h, cfg.code), cfg.code)
    return e, extra


@dataclass
class MethodResult:
    method: str
    pi: Ordering            # top ordering, in the input orientation
    phi: Ordering           # bottom ordering, in the input orientation
    encoded: EncodedGraph
    transposed: bool
    roundtrip_ok: bool
    timings: dict


def _run_oriented(g, method, cfg, transposed):
    timings: dict = {}
    h = _timed(timings, "transpose", transpose, g) if transposed else g
    pi, phi = order_graph(h, method, cfg, timings)
    relabeled = _timed(timings, "relabel", apply_orderings, h, pi, phi)
    e, extra = _timed(timings, "encode", encode_relabeled, relabeled, cfg)
    if extra is not None:
        phi = phi.compose(extra)
        relabeled = apply_orderings(h, pi, phi)
    e.transposed = transposed
    back = _timed(timings, "decode", decode_graph, EncodedGraph.from_bytes(e.to_bytes()))
    ok = back == relabeled
    if transposed:
        pi, phi = phi, pi
    return MethodResult(method, pi, phi, e, transposed, ok, timings)


def run_method(g: BipartiteGraph, method: str, cfg: PipelineConfig | None = None,
               transposed: bool = False, auto_transpose: bool = False) -> MethodResult:
    """Order, relabel, encode and verify.  With ``auto_transpose`` both
    orientations are tried and the smaller stream is kept."""
    cfg = cfg or PipelineConfig()
    res = _run_oriented(g, method, cfg, transposed)
    if auto_transpose:
        alt = _run_oriented(g, method, cfg, not transposed)
        if alt.encoded.n_bits < res.encoded.n_bits:
            alt.timings = {k: alt.timings.get(k, 0.0) + res.timings.get(k, 0.0)
                           for k in set(alt.timings) | set(res.timings)}
            res = alt
    return res


@dataclass
class BenchRow:
    dataset: str
    method: str
    n_top: int
    n_bot: int
    m: int
    bits_per_edge: float
    bim_log_gap: float
    adjacent_jaccard: float
    seed: int
    transposed: bool
    roundtrip_ok: bool
    timings: dict

    def flat(self) -> dict:
        d = asdict(self)
        for k, v in sorted(d.pop("timings").items()):
            d[f"time_{k}"] = round(v, 6)
        return d


def evaluate(g: BipartiteGraph, res: MethodResult, dataset: str, seed: int) -> BenchRow:
    """Row of metrics, measured on the orientation that was encoded."""
    if res.transposed:
        h, pi, phi = transpose(g), res.phi, res.pi
    else:
        h, pi, phi = g, res.pi, res.phi
    return BenchRow(
        dataset, res.method, h.n_top, h.n_bot, h.m,
        res.encoded.bits_per_edge, bim_log_gap(h, pi), adjacent_jaccard(h, phi),
        seed, res.transposed, res.roundtrip_ok, dict(res.timings),
    )


def run_bench(graphs: dict[str, BipartiteGraph], methods=METHODS, cfg: PipelineConfig | None = None,
              transposed: bool = False, auto_transpose: bool = False) -> list[BenchRow]:
    """One row per (dataset, method).  Only ``dual`` explores the other
    orientation when ``auto_transpose`` is set."""
    cfg = cfg or PipelineConfig()
    rows = []
    for name, g in graphs.items():
        for method in methods:
            res = run_method(g, method, cfg, transposed, auto_transpose and method == "dual")
            rows.append(evaluate(g, res, name, cfg.seed))
    return rows


def rows_to_csv(rows: list[BenchRow]) -> str:
    flat = [r.flat() for r in rows]
    keys: list[str] = []
    for d in flat:
        keys.extend(k for k in d if k not in keys)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    w.writerows(flat)
    return buf.getvalue()


def rows_to_json(rows: list[BenchRow], cfg: PipelineConfig | None = None) -> str:
    cfg = cfg or PipelineConfig()
    params = {
        "seed": cfg.seed,
        "code": asdict(cfg.code),
        "recbis": asdict(cfg.recbis_params),
        "levels": cfg.levels,
        "max_quadratic_bucket": cfg.max_quadratic_bucket,
        "degree_window": cfg.degree_window,
        "post_forest_reorder": cfg.post_forest_reorder,
        "forward_refs": cfg.forward_refs,
    }
    datasets: dict[str, dict] = {}
    for r in rows:
        d = datasets.setdefault(r.dataset, {"n_top": r.n_top, "n_bot": r.n_bot, "m": r.m, "methods": {}})
        d["methods"][r.method] = {
            "bits_per_edge": r.bits_per_edge,
            "bim_log_gap": r.bim_log_gap,
            "adjacent_jaccard": r.adjacent_jaccard,
            "transposed": r.transposed,
            "roundtrip_ok": r.roundtrip_ok,
            "timings": r.timings,
        }
    return json.dumps({"params": params, "datasets": datasets}, indent=2, default=_json_default)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
