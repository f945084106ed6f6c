"""Quality and cost measurement of graph retrieval against the oracle."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .decode import MODE_FLAT, MODE_GRAPH, decode_topk
from .errors import ValidationError
from .graph import GraphParams
from .index import SearchIndex
from .oracle import oracle_topk, precision_at_k
from .projection import VocabularyProjection


@dataclass(frozen=True)
class QueryRecord:
    """Per-query measurements; latency fields are non-deterministic."""

    query_index: int
    precision: float  # graph vs oracle, order-insensitive
    order_agree: bool  # graph ids exactly equal oracle ids, in order
    flat_precision: float  # flat-scan vs oracle, must be 1.0
    distance_evals: int  # graph mode
    graph_us: float
    flat_us: float
    oracle_us: float


@dataclass
class EvalReport:
    """One evaluation run: configuration echo, per-query records, aggregates."""

    vocab_size: int
    dim: int
    n_queries: int
    k: int
    ef_search: int
    params: GraphParams | None = None
    records: list[QueryRecord] = field(default_factory=list)

    @property
    def mean_precision(self) -> float:
        return float(np.mean([r.precision for r in self.records]))

    @property
    def order_agreement_rate(self) -> float:
        return float(np.mean([1.0 if r.order_agree else 0.0 for r in self.records]))

    @property
    def mean_flat_precision(self) -> float:
        return float(np.mean([r.flat_precision for r in self.records]))

    @property
    def mean_distance_evals(self) -> float:
        return float(np.mean([r.distance_evals for r in self.records]))

    @property
    def distance_evals_fraction(self) -> float:
        return self.mean_distance_evals / self.vocab_size

    def latency_stats(self, which: str) -> dict[str, float]:
        """mean/p50/p90/p99 over one latency column, in microseconds."""
        values = np.array([getattr(r, f"{which}_us") for r in self.records])
        return {
            "mean": float(values.mean()),
            "p50": float(np.percentile(values, 50)),
            "p90": float(np.percentile(values, 90)),
            "p99": float(np.percentile(values, 99)),
        }


def run_eval(
    index: SearchIndex,
    projection: VocabularyProjection,
    queries: np.ndarray,
    k: int,
    ef_search: int,
    params: GraphParams | None = None,
    warmup: int = 10,
) -> EvalReport:
    """Measure graph retrieval against the oracle over a query set.

    Every query is decoded three ways: graph mode (quality under test),
    flat mode (the metric-space exhaustive scan, always exact), and the
    direct-projection oracle (ground truth). Metric fields are
    deterministic; only the latency columns vary between runs.
    """
    queries = np.asarray(queries, dtype=np.float64)
    if queries.ndim != 2 or queries.shape[0] == 0:
        raise ValidationError("no queries")
    for warm in queries[: min(warmup, queries.shape[0])]:
        decode_topk(index, warm, k, ef_search=ef_search, mode=MODE_GRAPH)
    records = []
    for qi, h in enumerate(queries):
        try:
            t0 = time.perf_counter_ns()
            graph_res = decode_topk(index, h, k, ef_search=ef_search, mode=MODE_GRAPH)
            t1 = time.perf_counter_ns()
            flat_res = decode_topk(index, h, k, mode=MODE_FLAT)
            t2 = time.perf_counter_ns()
            exact_res = oracle_topk(projection, h, k)
            t3 = time.perf_counter_ns()
        except ValidationError as exc:
            raise ValidationError(f"query {qi}: {exc}") from None
        records.append(
            QueryRecord(
                query_index=qi,
                precision=precision_at_k(graph_res, exact_res),
                order_agree=bool(np.array_equal(graph_res.ids, exact_res.ids)),
                flat_precision=precision_at_k(flat_res, exact_res),
                distance_evals=graph_res.distance_evals,
                graph_us=(t1 - t0) / 1000.0,
                flat_us=(t2 - t1) / 1000.0,
                oracle_us=(t3 - t2) / 1000.0,
            )
        )
    return EvalReport(
        vocab_size=index.vocab_size,
        dim=index.dim,
        n_queries=queries.shape[0],
        k=k,
        ef_search=ef_search,
        params=params,
        records=records,
    )
