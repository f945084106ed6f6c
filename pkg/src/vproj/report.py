"""Serialize evaluation reports and render their companion figures.

A report is written three ways next to each other: a flat key-value
summary, a TSV with one record per query, and a PNG figure. Passing
include_timing=False drops the latency columns so two runs over the same
inputs serialize byte-identically.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluate import EvalReport


def _fmt(value: float) -> str:
    return f"{value:.9g}"


def format_summary(report: EvalReport, include_timing: bool = True) -> str:
    """Flat `key: value` text block for one evaluation run."""
    lines = [
        f"vocab_size: {report.vocab_size}",
        f"dim: {report.dim}",
        f"n_queries: {report.n_queries}",
        f"k: {report.k}",
        f"ef_search: {report.ef_search}",
    ]
    if report.params is not None:
        lines += [
            f"m: {report.params.m}",
            f"m0: {report.params.m0_resolved}",
            f"ef_construction: {report.params.ef_construction}",
            f"seed: {report.params.seed}",
        ]
    lines += [
        f"mean_precision_at_k: {_fmt(report.mean_precision)}",
        f"strict_order_agreement_rate: {_fmt(report.order_agreement_rate)}",
        f"flat_precision_at_k: {_fmt(report.mean_flat_precision)}",
        f"mean_distance_evals: {_fmt(report.mean_distance_evals)}",
        f"distance_evals_fraction: {_fmt(report.distance_evals_fraction)}",
    ]
    if include_timing:
        for which in ("graph", "flat", "oracle"):
            stats = report.latency_stats(which)
            for stat_name in ("mean", "p50", "p90", "p99"):
                lines.append(f"{which}_latency_us_{stat_name}: {_fmt(stats[stat_name])}")
    return "\n".join(lines) + "\n"


def format_records_tsv(report: EvalReport, include_timing: bool = True) -> str:
    """One TSV row per query. The ef_search column keeps bench runs mergeable."""
    cols = ["query", "ef_search", "precision", "order_agree", "flat_precision", "dist_evals"]
    if include_timing:
        cols += ["graph_us", "flat_us", "oracle_us"]
    rows = ["\t".join(cols)]
    for r in report.records:
        row = [
            str(r.query_index),
            str(report.ef_search),
            _fmt(r.precision),
            str(int(r.order_agree)),
            _fmt(r.flat_precision),
            str(r.distance_evals),
        ]
        if include_timing:
            row += [_fmt(r.graph_us), _fmt(r.flat_us), _fmt(r.oracle_us)]
        rows.append("\t".join(row))
    return "\n".join(rows) + "\n"


def render_eval_figure(report: EvalReport, path: str) -> None:
    """Precision, evaluation-count, and latency views of one run."""
    fig, axes = plt.subplots(1, 3, figsize=(13, 4))
    precisions = [r.precision for r in report.records]
    axes[0].hist(precisions, bins=20, range=(0.0, 1.0), color="#4878d0")
    axes[0].set_xlabel(f"precision@{report.k}")
    axes[0].set_ylabel("queries")
    axes[0].set_title(f"mean {report.mean_precision:.4f}")

    evals = [r.distance_evals for r in report.records]
    axes[1].hist(evals, bins=30, color="#ee854a")
    axes[1].axvline(report.vocab_size, color="k", linestyle="--", label="|V| (flat scan)")
    axes[1].set_xlabel("distance evals per query")
    axes[1].set_ylabel("queries")
    axes[1].legend()
    axes[1].set_title(f"mean {report.mean_distance_evals:.0f} ({report.distance_evals_fraction:.1%} of |V|)")

    labels = ["graph", "flat", "oracle"]
    data = [[getattr(r, f"{w}_us") for r in report.records] for w in labels]
    axes[2].boxplot(data, tick_labels=labels, showfliers=False)
    axes[2].set_ylabel("latency (us)")
    axes[2].set_title(f"k={report.k} ef={report.ef_search} |V|={report.vocab_size}")

    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_bench_figure(reports: list[EvalReport], path: str) -> None:
    """Quality and cost curves across ef_search values."""
    efs = [r.ef_search for r in reports]
    fig, axes = plt.subplots(1, 3, figsize=(13, 4))
    axes[0].plot(efs, [r.mean_precision for r in reports], "o-", color="#4878d0")
    axes[0].set_xlabel("ef_search")
    axes[0].set_ylabel(f"mean precision@{reports[0].k}")
    axes[0].set_ylim(0, 1.02)

    axes[1].plot(efs, [r.mean_distance_evals for r in reports], "o-", color="#ee854a")
    axes[1].axhline(reports[0].vocab_size, color="k", linestyle="--", label="|V| (flat scan)")
    axes[1].set_xlabel("ef_search")
    axes[1].set_ylabel("mean distance evals")
    axes[1].legend()

    axes[2].plot(
        efs, [r.latency_stats("graph")["p50"] for r in reports], "o-", label="graph p50"
    )
    axes[2].plot(
        efs, [r.latency_stats("flat")["p50"] for r in reports], "s--", label="flat p50"
    )
    axes[2].plot(
        efs, [r.latency_stats("oracle")["p50"] for r in reports], "^--", label="oracle p50"
    )
    axes[2].set_xlabel("ef_search")
    axes[2].set_ylabel("latency (us)")
    axes[2].legend()

    fig.suptitle(f"|V|={reports[0].vocab_size} d={reports[0].dim} k={reports[0].k}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report(
    reports: EvalReport | list[EvalReport],
    out_prefix: str,
    include_timing: bool = True,
    figures: bool = True,
) -> list[str]:
    """Write summary, records TSV, and figure files; returns written paths."""
    if isinstance(reports, EvalReport):
        reports = [reports]
    written = []
    summary_path = f"{out_prefix}.summary.txt"
    with open(summary_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(format_summary(r, include_timing) for r in reports))
    written.append(summary_path)
    records_path = f"{out_prefix}.records.tsv"
    with open(records_path, "w", encoding="utf-8") as fh:
        for pos, r in enumerate(reports):
            tsv = format_records_tsv(r, include_timing)
            if pos > 0:
                tsv = tsv.split("\n", 1)[1]  # single header for merged sections
            fh.write(tsv)
    written.append(records_path)
    if figures:
        figure_path = f"{out_prefix}.png"
        if len(reports) == 1:
            render_eval_figure(reports[0], figure_path)
        else:
            render_bench_figure(reports, figure_path)
        written.append(figure_path)
    return written
