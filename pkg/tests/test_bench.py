import csv
import io
import json
import math

import pytest

from bicompress.bench import (
    METHODS,
    PipelineConfig,
    order_graph,
    rows_to_csv,
    rows_to_json,
    run_bench,
    run_method,
)
from bicompress.codes import CodeParams
from bicompress.graph import is_bijection, transpose
from bicompress.plotting import plot_bits_per_edge, plot_objectives
from bicompress.synthetic import planted_blocks, planted_duplicates, random_bipartite


@pytest.fixture(scope="module")
def small_graphs():
    return {
        "blocks": planted_blocks(n_blocks=6, block_size=20, queries_per_block=15, degree=5, seed=1),
        "dups": planted_duplicates(60, 3, n_top=400, degree=8, noise=0.1, seed=2),
    }


@pytest.mark.parametrize("method", METHODS)
def test_every_method_roundtrips(method, small_graphs):
    for g in small_graphs.values():
        res = run_method(g, method, PipelineConfig(seed=3))
        assert res.roundtrip_ok
        assert is_bijection(res.pi.perm) and is_bijection(res.phi.perm)
        assert len(res.pi) == g.n_top and len(res.phi) == g.n_bot


def test_unknown_method():
    with pytest.raises(ValueError):
        order_graph(random_bipartite(5, 5, 10), "bogus")


def test_method_definitions(small_graphs):
    g = small_graphs["blocks"]
    cfg = PipelineConfig(seed=1)
    nat_pi, nat_phi = order_graph(g, "natural", cfg)
    assert nat_pi.perm.tolist() == list(range(g.n_top))
    dual_pi, _ = order_graph(g, "dual", cfg)
    sh_pi, _ = order_graph(g, "shingle", cfg)
    assert dual_pi == sh_pi
    assert order_graph(g, "dual", cfg) == order_graph(g, "dual", cfg)


def test_transposed_orderings_refer_to_input_sides(small_graphs):
    g = small_graphs["dups"]
    res = run_method(g, "dual", PipelineConfig(), transposed=True)
    assert res.transposed and res.encoded.transposed
    assert len(res.pi) == g.n_top and len(res.phi) == g.n_bot
    assert res.roundtrip_ok


def test_auto_transpose_keeps_smaller(small_graphs):
    g = small_graphs["blocks"]
    cfg = PipelineConfig()
    a = run_method(g, "dual", cfg)
    b = run_method(g, "dual", cfg, transposed=True)
    best = run_method(g, "dual", cfg, auto_transpose=True)
    assert best.encoded.n_bits == min(a.encoded.n_bits, b.encoded.n_bits)


@pytest.mark.parametrize("flags", [dict(post_forest_reorder=True), dict(forward_refs=True),
                                   dict(post_forest_reorder=True, forward_refs=True)])
def test_extension_pipelines(flags, small_graphs):
    g = small_graphs["dups"]
    cfg = PipelineConfig(code=CodeParams("zeta", 3, 8, 3), **flags)
    res = run_method(g, "dual", cfg)
    assert res.roundtrip_ok
    if flags.get("forward_refs"):
        assert res.encoded.forward
    if flags == dict(post_forest_reorder=True):
        assert res.encoded.n_bits <= run_method(g, "dual", PipelineConfig()).encoded.n_bits


def test_bench_rows_and_reports(small_graphs, tmp_path):
    rows = run_bench(small_graphs, cfg=PipelineConfig(seed=2), auto_transpose=True)
    assert len(rows) == 2 * len(METHODS)
    for r in rows:
        assert r.roundtrip_ok
        assert math.isfinite(r.bits_per_edge) and r.bits_per_edge > 0
        assert r.bim_log_gap >= 0 and 0 <= r.adjacent_jaccard <= 1
        assert r.seed == 2
        assert all(v >= 0 for v in r.timings.values())
    assert not any(r.transposed for r in rows if r.method != "dual")
    parsed = list(csv.DictReader(io.StringIO(rows_to_csv(rows))))
    assert [p["method"] for p in parsed[:len(METHODS)]] == list(METHODS)
    doc = json.loads(rows_to_json(rows, PipelineConfig(seed=2)))
    assert doc["params"]["seed"] == 2
    assert set(doc["datasets"]["blocks"]["methods"]) == set(METHODS)
    plot_bits_per_edge(rows, tmp_path / "b.png", title="t")
    plot_objectives(rows, tmp_path / "o.png")
    assert (tmp_path / "b.png").read_bytes()[:4] == b"\x89PNG"
    assert (tmp_path / "o.png").stat().st_size > 0


def test_measured_on_encoded_orientation(small_graphs):
    g = small_graphs["blocks"]
    rows = run_bench({"t": transpose(g)}, methods=["natural"])
    assert (rows[0].n_top, rows[0].n_bot) == (g.n_bot, g.n_top)
