"""Ground truth: the full projection pass the index is measured against."""

from __future__ import annotations

import numpy as np

from .decode import TopKResult, softmax
from .errors import ValidationError
from .projection import VocabularyProjection


def oracle_topk(projection: VocabularyProjection, h: np.ndarray, k: int) -> TopKResult:
    """Exact top-k by computing every logit w_i . h + b_i at float64.

    This path never touches the lifted points, so it is an independent
    check on the whole metric pipeline. Cost is one |V| x d pass.
    """
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 1 or h.shape[0] != projection.dim:
        raise ValidationError(
            f"dimension mismatch: projection is {projection.dim}-dim, got {h.shape}"
        )
    if not (1 <= k <= projection.vocab_size):
        raise ValidationError(f"k={k} out of range for vocab of {projection.vocab_size}")
    logits = projection.weights.astype(np.float64) @ h + projection.biases.astype(np.float64)
    order = np.lexsort((np.arange(projection.vocab_size), -logits))[:k]
    top_logits = logits[order]
    return TopKResult(
        ids=order.astype(np.int64),
        logits=top_logits,
        probs_topk=softmax(top_logits),
        k=k,
        exact=True,
        distance_evals=projection.vocab_size,
    )


def precision_at_k(approx: TopKResult, exact: TopKResult) -> float:
    """|approx ids intersect exact ids| / k, order-insensitive."""
    if approx.k != exact.k:
        raise ValidationError(f"k mismatch: {approx.k} vs {exact.k}")
    overlap = len(set(approx.ids.tolist()) & set(exact.ids.tolist()))
    return overlap / approx.k
