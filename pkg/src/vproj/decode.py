"""End-to-end query path: lift, retrieve, recover logits, softmax.

Logits are recovered from squared distances through the O(1) inverse
identity rather than recomputed against the weight matrix, so the decode
path exercises the same numbers the index searched on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .graph import flat_search, search_topk
from .index import SearchIndex
from .transform import distance_to_logit, transform_query

MODE_GRAPH = "graph"
MODE_FLAT = "flat"

DEFAULT_EF_SEARCH = 64


@dataclass
class TopKResult:
    """Ranked words for one query: ids, exact logits, top-k softmax."""

    ids: np.ndarray  # (k,) int64, logit descending, ties by id ascending
    logits: np.ndarray  # (k,) float64
    probs_topk: np.ndarray  # (k,) float64, sums to 1
    k: int
    exact: bool
    distance_evals: int


def softmax(logits: np.ndarray) -> np.ndarray:
    """Stable softmax: shift by the max before exponentiating."""
    shifted = logits - logits.max()
    e = np.exp(shifted)
    return e / e.sum()


def decode_topk(
    index: SearchIndex,
    h: np.ndarray,
    k: int,
    ef_search: int | None = None,
    mode: str = MODE_GRAPH,
) -> TopKResult:
    """Return the top-k words for a context vector.

    mode="flat" scans all lifted points and is exact; mode="graph" walks
    the small-world graph with a candidate list of width ef_search
    (default max(k, 64)).
    """
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 1 or h.shape[0] != index.dim:
        raise ValidationError(
            f"dimension mismatch: index expects {index.dim}-dim queries, got {h.shape}"
        )
    if not (1 <= k <= index.vocab_size):
        raise ValidationError(f"k={k} out of range for vocab of {index.vocab_size}")
    query = transform_query(h)
    if mode == MODE_FLAT:
        res = flat_search(index.points, query, k)
    elif mode == MODE_GRAPH:
        if ef_search is None:
            ef_search = max(k, DEFAULT_EF_SEARCH)
        if ef_search < k:
            raise ValidationError(f"ef_search={ef_search} must be >= k={k}")
        res = search_topk(index.graph, index.points, query, k, ef_search)
    else:
        raise ValidationError(f"unknown decode mode {mode!r}")
    logits = distance_to_logit(res.dists_sq, index.bound, query.h_norm_sq)
    return TopKResult(
        ids=res.ids,
        logits=logits,
        probs_topk=softmax(logits),
        k=k,
        exact=mode == MODE_FLAT,
        distance_evals=res.distance_evals,
    )


def batch_decode(
    index: SearchIndex,
    queries: np.ndarray,
    k: int,
    ef_search: int | None = None,
    mode: str = MODE_GRAPH,
) -> list[TopKResult]:
    """Decode a batch of context vectors, preserving order."""
    results = []
    for pos, h in enumerate(queries):
        try:
            results.append(decode_topk(index, h, k, ef_search=ef_search, mode=mode))
        except ValidationError as exc:
            raise ValidationError(f"query {pos}: {exc}") from None
    return results
