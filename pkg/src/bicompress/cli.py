"""Command-line interface: ``bicompress {stats,reorder,eval,compress,decompress,bench}``.

Exit status 0 on success, 2 on usage errors, 1 on I/O or format errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import (
    METHODS,
    PipelineConfig,
    encode_relabeled,
    order_graph,
    rows_to_csv,
    rows_to_json,
    run_bench,
    run_method,
)
from .codec import CorruptStreamError, EncodedGraph, decode_graph
from .codes import CODE_KINDS, CodeParams
from .graph import (
    GraphError,
    Ordering,
    apply_orderings,
    dump_cache,
    identity_ordering,
    read_graph,
    read_ordering,
    transpose,
    write_ordering,
)
from .objective import adjacent_jaccard, bim_log_gap, log_gap_union
from .recbis import RecBisParams
from .synthetic import planted_blocks, planted_duplicates

log = logging.getLogger("bicompress")

SYNTHETIC = {
    "planted-blocks": lambda seed: planted_blocks(seed=seed),
    "planted-duplicates": lambda seed: planted_duplicates(200, 3, noise=0.1, seed=seed),
}


class CliError(Exception):
    """I/O or data problem; reported with exit status 1."""


# -- argument plumbing --------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="seed for every randomized step")
    p.add_argument("--transpose", action="store_true", help="switch the roles of the two sides first")
    p.add_argument("--report", choices=("csv", "json"), default="json", help="format of stdout reports")


def _add_ordering(p: argparse.ArgumentParser, default_method: str | None = "natural") -> None:
    p.add_argument("--method", choices=METHODS, default=default_method)
    p.add_argument("--leaf-size", type=int, default=32)
    p.add_argument("--max-passes", type=int, default=10)
    p.add_argument("--no-swapflip", action="store_true", help="disable partition swap/flip")
    p.add_argument("--levels", type=int, choices=(1, 2), default=2, help="shingle levels")
    p.add_argument("--max-quadratic-bucket", type=int, default=2048)
    p.add_argument("--degree-window", type=int, default=64)


def _add_code(p: argparse.ArgumentParser) -> None:
    p.add_argument("--code", choices=CODE_KINDS, default="zeta", help="residual code")
    p.add_argument("--zeta-k", type=int, default=3)
    p.add_argument("--window", type=int, default=8, help="reference window W")
    p.add_argument("--max-chain", type=int, default=3, help="reference chain limit L")
    p.add_argument("--post-forest-reorder", action="store_true",
                   help="lay out each reference tree contiguously, then re-encode")
    p.add_argument("--forward-refs", action="store_true", help="allow references to later records")


def _add_orders_in(p: argparse.ArgumentParser) -> None:
    p.add_argument("--top-order", help="position file for top vertices")
    p.add_argument("--bottom-order", help="position file for bottom vertices")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bicompress", description="Reorder and compress bipartite graphs.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="sizes and degree statistics")
    p.add_argument("graph")
    _add_common(p)

    p = sub.add_parser("reorder", help="compute orderings and write position files")
    p.add_argument("graph")
    p.add_argument("--out", required=True, help="prefix; writes PREFIX.top.order and PREFIX.bottom.order")
    _add_common(p)
    _add_ordering(p)

    p = sub.add_parser("eval", help="evaluate an objective for given orderings")
    p.add_argument("graph")
    p.add_argument("--objective", choices=("bimloggap", "loggapunion", "adjjaccard", "bits"),
                   default="bimloggap")
    _add_common(p)
    _add_ordering(p, default_method=None)
    _add_orders_in(p)
    _add_code(p)

    p = sub.add_parser("compress", help="reorder and encode into a BGC1 stream")
    p.add_argument("graph")
    p.add_argument("--out", required=True, help="output stream")
    p.add_argument("--auto-transpose", action="store_true", help="try both orientations, keep the smaller")
    p.add_argument("--orders-out", help="prefix for the final position files")
    _add_common(p)
    _add_ordering(p)
    _add_orders_in(p)
    _add_code(p)

    p = sub.add_parser("decompress", help="decode a BGC1 stream into a BGZ1 cache")
    p.add_argument("stream")
    p.add_argument("--out", required=True)
    p.add_argument("--restore-ids", action="store_true",
                   help="undo the relabeling using --top-order/--bottom-order")
    _add_orders_in(p)

    p = sub.add_parser("bench", help="compare all methods; writes CSV, JSON and a figure")
    p.add_argument("graphs", nargs="*", help=f"edge lists, caches or one of {', '.join(SYNTHETIC)}")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--methods", nargs="+", choices=METHODS, default=list(METHODS))
    p.add_argument("--auto-transpose", action="store_true", help="let dual try both orientations")
    _add_common(p)
    _add_ordering(p, default_method=None)
    _add_code(p)
    return ap


def _config(args) -> PipelineConfig:
    try:
        code = CodeParams(args.code, args.zeta_k, args.window, args.max_chain) if hasattr(args, "code") else CodeParams()
        rb = RecBisParams(leaf_size=args.leaf_size, max_passes=args.max_passes,
                          swapflip=not args.no_swapflip)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return PipelineConfig(
        seed=args.seed, code=code, recbis=rb, levels=args.levels,
        max_quadratic_bucket=args.max_quadratic_bucket, degree_window=args.degree_window,
        post_forest_reorder=getattr(args, "post_forest_reorder", False),
        forward_refs=getattr(args, "forward_refs", False),
    )


def _load(path: str, seed: int = 0):
    if path in SYNTHETIC:
        return SYNTHETIC[path](seed)
    try:
        return read_graph(path)
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}") from None
    except GraphError as exc:
        raise CliError(f"{path}: {exc}") from None


def _read_order(path: str, n: int) -> Ordering:
    try:
        return read_ordering(path, n)
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise CliError(f"{path}: {exc}") from None


def _write(path: str, data: bytes | str) -> None:
    try:
        mode = "wb" if isinstance(data, bytes) else "w"
        with open(path, mode) as fh:
            fh.write(data)
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}") from None


def _emit(record: dict, fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(record, indent=2, default=_plain) + "\n")
    else:
        w = csv.DictWriter(out, fieldnames=list(record), lineterminator="\n")
        w.writeheader()
        w.writerow(record)


def _plain(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(type(o).__name__)


def _given_orders(args, g):
    """Orderings from files where given, else from ``--method`` (in the
    oriented graph)."""
    pi = phi = None
    if getattr(args, "top_order", None):
        pi = _read_order(args.top_order, g.n_top)
    if getattr(args, "bottom_order", None):
        phi = _read_order(args.bottom_order, g.n_bot)
    return pi, phi


def _orient_orders(args, g, cfg, transposed: bool):
    """(pi, phi) for the oriented graph; files refer to the input sides."""
    pi, phi = _given_orders(args, g)
    h = transpose(g) if transposed else g
    if transposed:
        pi, phi = phi, pi
    if (pi is None or phi is None) and args.method:
        mpi, mphi = order_graph(h, args.method, cfg)
        pi = pi if pi is not None else mpi
        phi = phi if phi is not None else mphi
    pi = pi if pi is not None else identity_ordering(h.n_top)
    phi = phi if phi is not None else identity_ordering(h.n_bot)
    return h, pi, phi


# -- subcommands --------------------------------------------------------------

def cmd_stats(args) -> int:
    g = _load(args.graph, args.seed)
    if args.transpose:
        g = transpose(g)
    deg = g.degrees()
    tdeg = g.top_degrees()
    rec = {
        "graph": args.graph, "n_top": g.n_top, "n_bot": g.n_bot, "m": g.m,
        "bottom_degree_mean": float(deg.mean()) if len(deg) else 0.0,
        "bottom_degree_max": int(deg.max()) if len(deg) else 0,
        "top_degree_mean": float(tdeg.mean()) if len(tdeg) else 0.0,
        "top_degree_max": int(tdeg.max()) if len(tdeg) else 0,
        "isolated_bottom": int(np.sum(deg == 0)),
        "isolated_top": int(np.sum(tdeg == 0)),
    }
    _emit(rec, args.report)
    return 0


def cmd_reorder(args) -> int:
    g = _load(args.graph, args.seed)
    cfg = _config(args)
    h = transpose(g) if args.transpose else g
    pi, phi = order_graph(h, args.method, cfg)
    if args.transpose:
        pi, phi = phi, pi
    for side, order in (("top", pi), ("bottom", phi)):
        path = f"{args.out}.{side}.order"
        try:
            write_ordering(order, path)
        except OSError as exc:
            raise CliError(f"{path}: {exc.strerror or exc}") from None
    _emit({"graph": args.graph, "method": args.method, "seed": args.seed, "transposed": args.transpose,
           "top_order": f"{args.out}.top.order", "bottom_order": f"{args.out}.bottom.order"}, args.report)
    return 0


def cmd_eval(args) -> int:
    g = _load(args.graph, args.seed)
    cfg = _config(args)
    h, pi, phi = _orient_orders(args, g, cfg, args.transpose)
    if args.objective == "bimloggap":
        value = bim_log_gap(h, pi)
    elif args.objective == "adjjaccard":
        value = adjacent_jaccard(h, phi)
    elif args.objective == "loggapunion":
        # union order: all tops by pi, then all bottoms by phi
        seq = np.concatenate([pi.inv, phi.inv + h.n_top])
        value = log_gap_union(h, Ordering.from_sequence(seq))
    else:
        e, _ = encode_relabeled(apply_orderings(h, pi, phi), cfg)
        value = e.bits_per_edge
    _emit({"graph": args.graph, "objective": args.objective, "value": value,
           "method": args.method, "seed": args.seed, "transposed": args.transpose}, args.report)
    return 0


def cmd_compress(args) -> int:
    g = _load(args.graph, args.seed)
    cfg = _config(args)
    if args.auto_transpose and not (args.top_order or args.bottom_order):
        res = run_method(g, args.method, cfg, transposed=args.transpose, auto_transpose=True)
        e, pi, phi, transposed = res.encoded, res.pi, res.phi, res.transposed
    else:
        candidates = [args.transpose] + ([not args.transpose] if args.auto_transpose else [])
        best = None
        for tr in candidates:
            h, opi, ophi = _orient_orders(args, g, cfg, tr)
            e, extra = encode_relabeled(apply_orderings(h, opi, ophi), cfg)
            if extra is not None:
                ophi = ophi.compose(extra)
            e.transposed = tr
            if tr:
                opi, ophi = ophi, opi
            if best is None or e.n_bits < best[0].n_bits:
                best = (e, opi, ophi, tr)
        e, pi, phi, transposed = best
    _write(args.out, e.to_bytes())
    if args.orders_out:
        for side, order in (("top", pi), ("bottom", phi)):
            path = f"{args.orders_out}.{side}.order"
            try:
                write_ordering(order, path)
            except OSError as exc:
                raise CliError(f"{path}: {exc.strerror or exc}") from None
    _emit({"graph": args.graph, "out": args.out, "method": args.method, "seed": args.seed,
           "transposed": transposed, "m": e.m, "bits": e.n_bits, "bits_per_edge": e.bits_per_edge,
           "forward": e.forward}, args.report)
    return 0


def cmd_decompress(args) -> int:
    try:
        data = Path(args.stream).read_bytes()
    except OSError as exc:
        raise CliError(f"{args.stream}: {exc.strerror or exc}") from None
    try:
        e = EncodedGraph.from_bytes(data)
        g = decode_graph(e)
    except CorruptStreamError as exc:
        raise CliError(f"{args.stream}: {exc}") from None
    if e.transposed:
        g = transpose(g)
    if args.restore_ids:
        pi = _read_order(args.top_order, g.n_top) if args.top_order else identity_ordering(g.n_top)
        phi = _read_order(args.bottom_order, g.n_bot) if args.bottom_order else identity_ordering(g.n_bot)
        # positions back to vertex ids: apply the inverse permutations
        g = apply_orderings(g, Ordering.from_perm(pi.inv), Ordering.from_perm(phi.inv))
    _write(args.out, dump_cache(g))
    return 0


def cmd_bench(args) -> int:
    from .plotting import plot_bits_per_edge, plot_objectives

    cfg = _config(args)
    names = args.graphs or list(SYNTHETIC)
    graphs = {}
    for name in names:
        g = _load(name, args.seed)
        graphs[Path(name).stem if name not in SYNTHETIC else name] = transpose(g) if args.transpose else g
    rows = run_bench(graphs, args.methods, cfg, auto_transpose=args.auto_transpose)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"{out}: {exc.strerror or exc}") from None
    csv_text = rows_to_csv(rows)
    _write(str(out / "bench.csv"), csv_text)
    _write(str(out / "bench.json"), rows_to_json(rows, cfg))
    plot_bits_per_edge(rows, out / "bits_per_edge.png")
    plot_objectives(rows, out / "objective_vs_bits.png")
    if args.report == "csv":
        sys.stdout.write(csv_text)
    else:
        sys.stdout.write(json.dumps([r.flat() for r in rows], indent=2, default=_plain) + "\n")
    bad = [f"{r.dataset}/{r.method}" for r in rows if not r.roundtrip_ok]
    if bad:
        log.error("roundtrip failed for %s", ", ".join(bad))
        return 1
    return 0


COMMANDS = {
    "stats": cmd_stats,
    "reorder": cmd_reorder,
    "eval": cmd_eval,
    "compress": cmd_compress,
    "decompress": cmd_decompress,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    except CliError as exc:
        print(f"bicompress: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
