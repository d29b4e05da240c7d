import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bicompress.graph import (
    BipartiteGraph,
    DimensionError,
    EmptyGraphError,
    GraphFormatError,
    Ordering,
    apply_orderings,
    dump_cache,
    identity_ordering,
    is_bijection,
    load_cache,
    load_edge_list,
    random_ordering,
    read_graph,
    read_ordering,
    transpose,
    write_edge_list,
    write_ordering,
)

from conftest import graphs, random_graph


def test_duplicate_edges_collapse():
    g = load_edge_list(["0 1", "0 1", "1 0"])
    assert (g.n_bot, g.n_top, g.m) == (2, 2, 2)


def test_adjacency_sorted_after_densify():
    g = load_edge_list(["0 5", "0 2"])
    # 5 is seen first, so it becomes top 0 and 2 becomes top 1
    assert g.neighbors(0).tolist() == [0, 1]


def test_comments_blank_lines_and_extra_columns():
    text = "% bip unweighted\n# another\n\n3 7 1 1234\n3 9\n"
    g = load_edge_list(io.StringIO(text))
    assert g.m == 2 and g.n_bot == 1


def test_dedup_matches_set_oracle(rng):
    lines = [f"{rng.integers(0, 4)} {rng.integers(0, 4)}" for _ in range(10)]
    g = load_edge_list(lines)
    assert g.m == len(set(lines))


@pytest.mark.parametrize("line,where", [("1 x", 2), ("4", 2), ("-1 3", 2)])
def test_malformed_line_reports_line_number(line, where):
    with pytest.raises(GraphFormatError) as exc:
        load_edge_list(["0 0", line])
    assert exc.value.line == where
    assert f"line {where}" in str(exc.value)


def test_empty_input():
    with pytest.raises(EmptyGraphError):
        load_edge_list(["% nothing here", ""])


def test_invalid_graph_rejected():
    with pytest.raises(ValueError):
        BipartiteGraph(3, 1, [0, 2], [2, 1])
    with pytest.raises(ValueError):
        BipartiteGraph(2, 1, [0, 1], [5])


def test_graph_is_immutable():
    g = BipartiteGraph.from_adjacency([[0, 1]])
    with pytest.raises(AttributeError):
        g.n_top = 7
    with pytest.raises(ValueError):
        g.indices[0] = 1


def test_transpose_small():
    g = BipartiteGraph.from_adjacency([[0, 1]])
    t = transpose(g)
    assert t.adjacency() == [[0], [0]]
    assert transpose(BipartiteGraph.empty()) == BipartiteGraph.empty()


@given(graphs())
def test_transpose_involution(g):
    t = transpose(g)
    assert t.m == g.m and (t.n_top, t.n_bot) == (g.n_bot, g.n_top)
    assert transpose(t) == g


def test_orderings_basic():
    assert identity_ordering(3).perm.tolist() == [0, 1, 2]
    assert random_ordering(5, 7) == random_ordering(5, 7)
    assert is_bijection(random_ordering(100, 3).perm)
    o = Ordering.from_sequence([2, 0, 1])
    assert o.perm.tolist() == [1, 2, 0]
    assert o.reversed().inv.tolist() == [1, 0, 2]
    with pytest.raises(ValueError):
        Ordering.from_perm([0, 0, 1])


def test_apply_identity_and_swap():
    g = BipartiteGraph.from_adjacency([[0, 2], [1, 2], [0]], 3)
    assert apply_orderings(g, identity_ordering(3), identity_ordering(3)) == g
    swap = Ordering.from_perm([1, 0, 2])
    h = apply_orderings(g, swap, identity_ordering(3))
    assert h.adjacency() == [[1, 2], [0, 2], [1]]


def test_apply_size_mismatch():
    g = BipartiteGraph.from_adjacency([[0]], 2)
    with pytest.raises(DimensionError):
        apply_orderings(g, identity_ordering(3), identity_ordering(1))


@given(graphs(), st.integers(0, 2**32))
@settings(max_examples=60)
def test_apply_orderings_edge_map(g, seed):
    pi, phi = random_ordering(g.n_top, seed), random_ordering(g.n_bot, seed + 1)
    h = apply_orderings(g, pi, phi)
    expect = {(int(phi.perm[q]), int(pi.perm[t])) for q, nb in enumerate(g.adjacency()) for t in nb}
    got = {(q, t) for q, nb in enumerate(h.adjacency()) for t in nb}
    assert got == expect
    assert sorted(h.degrees()) == sorted(g.degrees())
    assert sorted(h.top_degrees()) == sorted(g.top_degrees())


def test_cache_roundtrip(rng, tmp_path):
    g = random_graph(rng)
    data = dump_cache(g)
    assert data[:4] == b"BGZ1"
    assert load_cache(data) == g
    p = tmp_path / "g.bgz"
    p.write_bytes(data)
    assert read_graph(p) == g


def test_cache_corrupt():
    g = BipartiteGraph.from_adjacency([[0, 1]])
    with pytest.raises(GraphFormatError):
        load_cache(dump_cache(g)[:-2])
    with pytest.raises(GraphFormatError):
        load_cache(b"XXXX" + dump_cache(g)[4:])


def test_edge_list_file_roundtrip(rng, tmp_path):
    g = random_graph(rng, p_empty=0.0)
    p = tmp_path / "g.txt"
    with open(p, "w") as fh:
        write_edge_list(g, fh)
    back = read_graph(p)
    assert back.m == g.m


def test_ordering_file_roundtrip(tmp_path):
    o = random_ordering(20, 4)
    p = tmp_path / "o.order"
    write_ordering(o, p)
    assert read_ordering(p, 20) == o
    with pytest.raises(DimensionError):
        read_ordering(p, 21)


def test_isolated_vertices_allowed():
    g = BipartiteGraph.from_adjacency([[], [3], []], 5)
    assert g.m == 1 and g.degrees().tolist() == [0, 1, 0]
    assert np.all(g.top_degrees()[[0, 1, 2, 4]] == 0)
