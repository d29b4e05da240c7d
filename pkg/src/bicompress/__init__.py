"""Lossless compression of bipartite graphs through dual vertex reordering.

Tops are ordered by recursive bisection (with partition swap/flip), bottoms
by min-hash shingles refined with a greedy similarity pass, and the relabeled
adjacency is written with a referencing delta-gap codec.
"""
from .bench import METHODS, PipelineConfig, order_graph, run_bench, run_method
from .codec import (
    CorruptStreamError,
    EncodedGraph,
    ReferenceForest,
    decode_graph,
    encode_graph,
    encode_with_references,
    extract_reference_forest,
)
from .codes import CodeParams, get_code, put_code
from .extensions import ReferenceDag, forest_reorder, forward_reference_select
from .graph import (
    BipartiteGraph,
    DimensionError,
    EmptyGraphError,
    GraphError,
    GraphFormatError,
    Ordering,
    apply_orderings,
    identity_ordering,
    load_edge_list,
    random_ordering,
    read_graph,
    transpose,
)
from .objective import adjacent_jaccard, bim_log_gap, log_gap_union
from .recbis import RecBisParams, recbis_order, recbis_unipartite, swap_flip_decide
from .shingle import fingerprints, shingle_order, simref_order

__version__ = "0.1.0"

__all__ = [
    "METHODS", "PipelineConfig", "order_graph", "run_bench", "run_method",
    "CorruptStreamError", "EncodedGraph", "ReferenceForest", "decode_graph", "encode_graph",
    "encode_with_references", "extract_reference_forest",
    "CodeParams", "get_code", "put_code",
    "ReferenceDag", "forest_reorder", "forward_reference_select",
    "BipartiteGraph", "DimensionError", "EmptyGraphError", "GraphError", "GraphFormatError",
    "Ordering", "apply_orderings", "identity_ordering", "load_edge_list", "random_ordering",
    "read_graph", "transpose",
    "adjacent_jaccard", "bim_log_gap", "log_gap_union",
    "RecBisParams", "recbis_order", "recbis_unipartite", "swap_flip_decide",
    "fingerprints", "shingle_order", "simref_order",
    "__version__",
]
