"""Command-line driver: build an index, query it, evaluate, benchmark.

Exit codes: 0 success, 1 runtime or data error (single-line diagnostic on
stderr), 2 usage error. Query output is machine-parsable TSV; every
non-data line starts with '#'.
"""

from __future__ import annotations

import argparse
import sys
import time
from collections import Counter

import numpy as np

from .decode import MODE_FLAT, decode_topk
from .errors import ValidationError, VprojError
from .evaluate import run_eval
from .graph import GraphParams
from .index import build_index, load_index, save_index
from .projection import load_frequencies, load_projection, save_frequencies, save_projection
from .smoothing import smooth_consistent, smooth_laplacian, smooth_winners_take_all
from .synth import DIST_GAUSSIAN, DIST_ZIPF, load_queries, save_queries, synth_dataset


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _ef_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}") from None
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"need positive ef values, got {text!r}")
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vproj",
        description="Top-K vocabulary projection through metric-space graph search.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="build an index from an embeddings file")
    p_build.add_argument("--embeddings", required=True)
    p_build.add_argument("--format", choices=["text", "bin"], default="text")
    p_build.add_argument("--freq", help="frequency file, validated against the vocabulary")
    p_build.add_argument("--M", type=_positive_int, default=16, dest="m")
    p_build.add_argument("--m0", type=_positive_int, default=None)
    p_build.add_argument("--ef-construction", type=_positive_int, default=200)
    p_build.add_argument("--seed", type=int, default=42)
    p_build.add_argument("--out", required=True)

    p_query = sub.add_parser("query", help="decode context vectors against an index")
    p_query.add_argument("--index", required=True)
    p_query.add_argument("--embeddings", required=True)
    p_query.add_argument("--embeddings-format", choices=["text", "bin"], default="text")
    src = p_query.add_mutually_exclusive_group(required=True)
    src.add_argument("--vector", help="one query as comma-separated floats")
    src.add_argument("--queries", help="file with one query vector per line")
    p_query.add_argument("--k", type=_positive_int, default=10)
    p_query.add_argument("--ef-search", type=_positive_int, default=64)
    p_query.add_argument("--mode", choices=["graph", "flat"], default="graph")
    p_query.add_argument(
        "--smooth", choices=["none", "consistent", "laplacian", "wta"], default="none"
    )
    p_query.add_argument("--epsilon", type=float, default=None)
    p_query.add_argument("--epsilon-frac", type=float, default=0.5)
    p_query.add_argument("--freq")

    for name in ("eval", "bench"):
        p = sub.add_parser(name, help=f"{name} graph retrieval against the oracle")
        p.add_argument("--index", required=True)
        p.add_argument("--embeddings", required=True)
        p.add_argument("--embeddings-format", choices=["text", "bin"], default="text")
        p.add_argument("--queries", required=True)
        p.add_argument("--k", type=_positive_int, default=10)
        if name == "eval":
            p.add_argument("--ef-search", type=_positive_int, default=64)
        else:
            p.add_argument("--ef-search", type=_ef_list, default=[16, 32, 64, 128])
        p.add_argument("--out", help="prefix for summary/records/figure files")
        p.add_argument("--warmup", type=int, default=10)
        p.add_argument("--no-timing", action="store_true")
        p.add_argument("--no-figures", action="store_true")

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset")
    p_synth.add_argument("--vocab", type=_positive_int, required=True)
    p_synth.add_argument("--dim", type=_positive_int, required=True)
    p_synth.add_argument("--dist", choices=["gaussian", "zipf"], default="gaussian")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--queries", type=int, default=100)
    p_synth.add_argument("--format", choices=["text", "bin"], default="bin")
    p_synth.add_argument("--out-prefix", required=True)
    return parser


def _cmd_build(args: argparse.Namespace) -> int:
    projection = load_projection(args.embeddings, args.format)
    if args.freq:
        load_frequencies(args.freq, projection)
    params = GraphParams(
        m=args.m, m0=args.m0, ef_construction=args.ef_construction, seed=args.seed
    )
    t0 = time.perf_counter()
    index = build_index(projection, params)
    elapsed = time.perf_counter() - t0
    save_index(index, args.out)
    hist = Counter(int(x) for x in index.graph.levels)
    hist_text = " ".join(f"{lv}:{hist[lv]}" for lv in sorted(hist))
    print(f"vocab_size: {index.vocab_size}")
    print(f"dim: {index.dim}")
    print(f"U: {index.u:.9g}")
    print(f"max_row_norm: {index.bound.max_row_norm:.9g}")
    print(f"levels: {hist_text}")
    print(f"build_seconds: {elapsed:.2f}")
    print(f"index: {args.out}")
    return 0


def _smoother(args: argparse.Namespace, projection, freq):
    """Returns a closure mapping a decoded result to a SmoothedDistribution."""
    if args.smooth == "none":
        return None
    if args.smooth in ("consistent", "laplacian"):
        if freq is None:
            raise ValidationError(f"frequency table required for {args.smooth} smoothing")
    if args.smooth == "consistent":
        return lambda res: smooth_consistent(
            res.ids, res.probs_topk, freq, epsilon=args.epsilon, epsilon_frac=args.epsilon_frac
        )
    if args.smooth == "laplacian":
        if args.epsilon is None:
            raise ValidationError("--epsilon required for laplacian smoothing")

        def _laplacian(res):
            dense = np.zeros(projection.vocab_size, dtype=np.float64)
            dense[res.ids] = res.probs_topk
            return smooth_laplacian(dense, freq, args.epsilon)

        return _laplacian
    if args.epsilon is None:
        raise ValidationError("--epsilon (per-word tail probability) required for wta smoothing")
    return lambda res: smooth_winners_take_all(
        res.ids, res.probs_topk, projection.vocab_size, args.epsilon
    )


def _cmd_query(args: argparse.Namespace) -> int:
    index = load_index(args.index)
    projection = load_projection(args.embeddings, args.embeddings_format)
    if projection.vocab_size != index.vocab_size or projection.dim != index.dim:
        raise ValidationError(
            f"embeddings ({projection.vocab_size} x {projection.dim}) do not match "
            f"index ({index.vocab_size} x {index.dim})"
        )
    freq = load_frequencies(args.freq, projection) if args.freq else None
    smoother = _smoother(args, projection, freq)
    if args.vector is not None:
        try:
            queries = np.array([[float(x) for x in args.vector.split(",")]])
        except ValueError:
            raise ValidationError(f"--vector is not a comma-separated float list") from None
    else:
        queries = load_queries(args.queries)
    header = ["rank", "token", "logit", "prob"]
    if smoother is not None:
        header.append("smoothed_prob")
    header.append("dist_evals")
    for qi, h in enumerate(queries):
        res = decode_topk(
            index,
            h,
            args.k,
            ef_search=args.ef_search,
            mode=MODE_FLAT if args.mode == "flat" else "graph",
        )
        smoothed = smoother(res) if smoother is not None else None
        print(f"# query {qi}\tmode={args.mode}\tk={args.k}\tef_search={args.ef_search}")
        print("# " + "\t".join(header))
        for rank, (wid, logit, prob) in enumerate(
            zip(res.ids, res.logits, res.probs_topk), start=1
        ):
            row = [str(rank), projection.tokens[int(wid)], f"{logit:.9g}", f"{prob:.9g}"]
            if smoothed is not None:
                row.append(f"{smoothed.prob(int(wid)):.9g}")
            row.append(str(res.distance_evals))
            print("\t".join(row))
    return 0


def _cmd_eval_bench(args: argparse.Namespace, ef_values: list[int]) -> int:
    from .report import format_summary, write_report  # defer matplotlib import

    index = load_index(args.index)
    projection = load_projection(args.embeddings, args.embeddings_format)
    if projection.vocab_size != index.vocab_size or projection.dim != index.dim:
        raise ValidationError(
            f"embeddings ({projection.vocab_size} x {projection.dim}) do not match "
            f"index ({index.vocab_size} x {index.dim})"
        )
    queries = load_queries(args.queries, dim=index.dim)
    reports = []
    for ef in ef_values:
        report = run_eval(index, projection, queries, args.k, ef, warmup=args.warmup)
        reports.append(report)
        sys.stdout.write(format_summary(report, include_timing=not args.no_timing))
        sys.stdout.write("\n")
    if args.out:
        written = write_report(
            reports,
            args.out,
            include_timing=not args.no_timing,
            figures=not args.no_figures,
        )
        for path in written:
            print(f"# wrote {path}")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    dist = DIST_GAUSSIAN if args.dist == "gaussian" else DIST_ZIPF
    if args.queries < 1:
        raise ValidationError("--queries must be >= 1")
    projection, freq, queries = synth_dataset(
        args.vocab, args.dim, distribution=dist, seed=args.seed, n_queries=args.queries
    )
    ext = "txt" if args.format == "text" else "bin"
    emb_path = f"{args.out_prefix}.embeddings.{ext}"
    freq_path = f"{args.out_prefix}.freq.txt"
    queries_path = f"{args.out_prefix}.queries.txt"
    save_projection(projection, emb_path, args.format)
    save_frequencies(projection, freq.counts, freq_path)
    save_queries(queries, queries_path)
    print(f"embeddings: {emb_path}")
    print(f"frequencies: {freq_path}")
    print(f"queries: {queries_path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "build":
            return _cmd_build(args)
        if args.command == "query":
            return _cmd_query(args)
        if args.command == "eval":
            return _cmd_eval_bench(args, [args.ef_search])
        if args.command == "bench":
            return _cmd_eval_bench(args, args.ef_search)
        if args.command == "synth":
            return _cmd_synth(args)
        raise AssertionError(f"unhandled command {args.command}")
    except VprojError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
