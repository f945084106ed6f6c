"""Spread top-k probability mass over the full vocabulary.

Retrieval leaves every unvisited word with no probability. Three tail
rules fix that, each O(k) to build with tail probabilities evaluable per
word in O(1):

* rank-consistent: y_i / (1 + eps) on the top-k, eps * g_j / (1 + eps)
  off it, where g is the frequency prior renormalized over the non-top-k
  words and 0 < eps < min(y). Keeps every probability positive, preserves
  the top-k order, and keeps every top-k word above every tail word.
* laplacian: (y_i + eps * f_i) / (1 + eps) applied densely. Simple, but a
  frequent tail word can overtake the top-k (see the consistency checker).
* winners-take-all: a flat epsilon per tail word, top-k rescaled to fit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .projection import FrequencyTable

MODE_CONSISTENT = "consistent"
MODE_LAPLACIAN = "laplacian"
MODE_WINNERS_TAKE_ALL = "winners_take_all"

_SUM_TOL = 1e-9


@dataclass
class SmoothedDistribution:
    """Sparse top-k probabilities plus a closed-form rule for the tail.

    ``tail_scale`` multiplies the frequency prior for off-top-k words in
    the consistent and laplacian modes; ``tail_const`` is the flat
    winners-take-all tail probability. Exactly one rule is active.
    """

    topk_ids: np.ndarray  # (k,) int64
    topk_probs: np.ndarray  # (k,) float64
    epsilon: float
    mode: str
    vocab_size: int
    tail_scale: float = 0.0
    tail_const: float = 0.0
    freq: FrequencyTable | None = None

    def __post_init__(self) -> None:
        self.topk_ids = np.asarray(self.topk_ids, dtype=np.int64)
        self.topk_probs = np.asarray(self.topk_probs, dtype=np.float64)
        self._id_to_pos = {int(i): p for p, i in enumerate(self.topk_ids)}

    @property
    def k(self) -> int:
        return self.topk_ids.shape[0]

    def prob(self, word_id: int) -> float:
        """Smoothed probability of one word, O(1)."""
        if not (0 <= word_id < self.vocab_size):
            raise ValidationError(f"word id {word_id} out of range")
        pos = self._id_to_pos.get(word_id)
        if pos is not None:
            return float(self.topk_probs[pos])
        if self.freq is not None:
            return self.tail_scale * float(self.freq.normalized[word_id])
        return self.tail_const

    def materialize(self) -> np.ndarray:
        """Dense length-|V| vector; matches :meth:`prob` entrywise."""
        if self.freq is not None:
            dense = self.tail_scale * self.freq.normalized
        else:
            dense = np.full(self.vocab_size, self.tail_const, dtype=np.float64)
        dense[self.topk_ids] = self.topk_probs
        return dense


def _check_topk(ids: np.ndarray, y: np.ndarray, vocab_size: int) -> tuple[np.ndarray, np.ndarray]:
    ids = np.asarray(ids, dtype=np.int64)
    y = np.asarray(y, dtype=np.float64)
    if ids.ndim != 1 or y.shape != ids.shape or ids.shape[0] < 1:
        raise ValidationError("ids and probabilities must be aligned non-empty vectors")
    if len(set(ids.tolist())) != ids.shape[0]:
        raise ValidationError("duplicate word id in top-k set")
    if ids.min() < 0 or ids.max() >= vocab_size:
        raise ValidationError("word id out of range")
    if abs(float(y.sum()) - 1.0) > _SUM_TOL:
        raise ValidationError(f"top-k probabilities sum to {float(y.sum())}, expected 1")
    return ids, y


def smooth_consistent(
    ids: np.ndarray,
    y: np.ndarray,
    freq: FrequencyTable,
    epsilon: float | None = None,
    epsilon_frac: float = 0.5,
) -> SmoothedDistribution:
    """Rank-consistent smoothing of a top-k distribution.

    With epsilon omitted, uses epsilon_frac * min(y); either way the bound
    0 < epsilon < min(y) is enforced strictly, as the order guarantees
    require.
    """
    vocab_size = freq.vocab_size
    ids, y = _check_topk(ids, y, vocab_size)
    if np.any(y <= 0):
        raise ValidationError("top-k probabilities must all be positive")
    if np.any(freq.normalized <= 0):
        raise ValidationError("frequency prior must be positive everywhere (raise the floor)")
    min_y = float(y.min())
    if epsilon is None:
        if not (0.0 < epsilon_frac < 1.0):
            raise ValidationError("epsilon_frac must lie in (0, 1)")
        epsilon = epsilon_frac * min_y
    if not (0.0 < epsilon < min_y):
        raise ValidationError(
            f"epsilon bound violated: need 0 < epsilon < min top-k prob "
            f"({epsilon} vs {min_y})"
        )
    if ids.shape[0] == vocab_size:
        # No tail to assign mass to; identity is the only normalized choice.
        return SmoothedDistribution(
            topk_ids=ids,
            topk_probs=y,
            epsilon=float(epsilon),
            mode=MODE_CONSISTENT,
            vocab_size=vocab_size,
            tail_const=0.0,
        )
    mask = np.zeros(vocab_size, dtype=bool)
    mask[ids] = True
    tail_f_sum = float(freq.normalized[~mask].sum())
    scale = epsilon / ((1.0 + epsilon) * tail_f_sum)
    return SmoothedDistribution(
        topk_ids=ids,
        topk_probs=y / (1.0 + epsilon),
        epsilon=float(epsilon),
        mode=MODE_CONSISTENT,
        vocab_size=vocab_size,
        tail_scale=scale,
        freq=freq,
    )


def smooth_laplacian(
    y_dense: np.ndarray, freq: FrequencyTable, epsilon: float
) -> SmoothedDistribution:
    """Dense frequency smoothing (y_i + eps * f_i) / (1 + eps).

    The support of y becomes the stored top set; everything else follows
    the tail rule eps * f_j / (1 + eps). Not rank-consistent in general.
    """
    y_dense = np.asarray(y_dense, dtype=np.float64)
    if y_dense.shape != (freq.vocab_size,):
        raise ValidationError("dense probabilities must match vocab size")
    if np.any(y_dense < 0):
        raise ValidationError("probabilities must be non-negative")
    if abs(float(y_dense.sum()) - 1.0) > _SUM_TOL:
        raise ValidationError(f"probabilities sum to {float(y_dense.sum())}, expected 1")
    if abs(float(freq.normalized.sum()) - 1.0) > _SUM_TOL:
        raise ValidationError("frequency prior is not normalized")
    if epsilon <= 0:
        raise ValidationError("epsilon must be positive")
    support = np.flatnonzero(y_dense > 0)
    smoothed = (y_dense[support] + epsilon * freq.normalized[support]) / (1.0 + epsilon)
    return SmoothedDistribution(
        topk_ids=support,
        topk_probs=smoothed,
        epsilon=float(epsilon),
        mode=MODE_LAPLACIAN,
        vocab_size=freq.vocab_size,
        tail_scale=epsilon / (1.0 + epsilon),
        freq=freq,
    )


def smooth_winners_take_all(
    ids: np.ndarray, y: np.ndarray, vocab_size: int, epsilon_tail: float
) -> SmoothedDistribution:
    """Flat tail: every unretrieved word gets epsilon_tail, top-k rescaled."""
    ids, y = _check_topk(ids, y, vocab_size)
    k = ids.shape[0]
    if k == vocab_size:
        return SmoothedDistribution(
            topk_ids=ids,
            topk_probs=y,
            epsilon=float(epsilon_tail),
            mode=MODE_WINNERS_TAKE_ALL,
            vocab_size=vocab_size,
            tail_const=0.0,
        )
    if epsilon_tail <= 0:
        raise ValidationError("epsilon_tail must be positive")
    tail_mass = epsilon_tail * (vocab_size - k)
    if tail_mass >= 1.0:
        raise ValidationError(
            f"tail mass {tail_mass} >= 1; lower epsilon_tail or raise k"
        )
    return SmoothedDistribution(
        topk_ids=ids,
        topk_probs=y * (1.0 - tail_mass),
        epsilon=float(epsilon_tail),
        mode=MODE_WINNERS_TAKE_ALL,
        vocab_size=vocab_size,
        tail_const=float(epsilon_tail),
    )


@dataclass(frozen=True)
class ConsistencyReport:
    """Literal evaluation of the three rank-consistency conditions."""

    positivity: bool  # every smoothed probability > 0
    order_preserved: bool  # within the top set: y_i <= y_j iff s_i <= s_j
    topk_dominates: bool  # every top-set prob >= every tail prob

    @property
    def consistent(self) -> bool:
        return self.positivity and self.order_preserved and self.topk_dominates


def check_consistency(dist: SmoothedDistribution, y: np.ndarray) -> ConsistencyReport:
    """Check a smoothed distribution against the original top-k probs.

    ``y`` is aligned to ``dist.topk_ids``. The conditions are evaluated
    exhaustively (all pairs within the top set, full tail scan), so this
    is a verification tool, not a hot-path call.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.shape != dist.topk_ids.shape:
        raise ValidationError("original probabilities must align with dist.topk_ids")
    dense = dist.materialize()
    positivity = bool(np.all(dense > 0))
    s = dist.topk_probs
    order_preserved = bool(
        np.all((y[:, None] <= y[None, :]) == (s[:, None] <= s[None, :]))
    )
    mask = np.zeros(dist.vocab_size, dtype=bool)
    mask[dist.topk_ids] = True
    if mask.all():
        topk_dominates = True
    else:
        topk_dominates = bool(s.min() >= dense[~mask].max())
    return ConsistencyReport(
        positivity=positivity,
        order_preserved=order_preserved,
        topk_dominates=topk_dominates,
    )
