"""Lift word vectors and queries so that Euclidean distance ranks like logits.

Each word row (w_i, b_i) becomes z_i = [w_i; b_i; sqrt(U^2 - |w_i|^2 - b_i^2)]
for a norm bound U >= max_i |[w_i; b_i]|, so every z_i sits on the sphere of
radius U. A context vector h becomes h~ = [h; 1; 0]. Expanding the square
gives

    |z_i - h~|^2 = U^2 + |h|^2 + 1 - 2 (w_i . h + b_i),

so ascending squared distance is exactly descending logit order, and the
logit is recovered from a distance in O(1) by inverting the identity.

Squared distances are used for all internal comparisons; square roots only
appear at the reporting edges (the word-to-word metric and the matching
value). Points are stored at float32 by default with a float64 working copy
for accumulation; pass dtype=float64 for a full-precision pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .projection import VocabularyProjection

BOUND_MAX_ROW_NORM = "max_augmented_row_norm"
BOUND_EXPLICIT = "explicit"

# Radicands above this (scaled by -U^2) are rounding noise and clamp to 0;
# anything below means the bound genuinely fails to cover a row.
_RADICAND_SLACK = 1e-6


@dataclass(frozen=True)
class TransformBound:
    """Norm bound U making every lifted vector well defined.

    u_sq is U^2 kept at full precision so the tight default bound does not
    pick up a sqrt/square round trip; it is derived, not persisted.
    """

    U: float
    mode: str
    max_row_norm: float
    u_sq: float | None = None

    def __post_init__(self) -> None:
        if self.U < self.max_row_norm:
            raise ValidationError(
                f"bound U={self.U} is below the max augmented row norm {self.max_row_norm}"
            )
        if self.U <= 0.0:
            raise ValidationError("bound U must be positive")
        if self.u_sq is None:
            object.__setattr__(self, "u_sq", self.U * self.U)


@dataclass
class TransformedPoints:
    """Lifted word vectors, one row per word, all on the sphere of radius U."""

    z: np.ndarray  # (|V|, d+2), float32 or float64
    bound: TransformBound
    source_dim: int
    z_math: np.ndarray = field(init=False, repr=False)  # float64 working copy

    def __post_init__(self) -> None:
        if self.z.ndim != 2 or self.z.shape[1] != self.source_dim + 2:
            raise ValidationError("lifted points must have source_dim + 2 columns")
        if self.z.dtype == np.float64:
            self.z_math = self.z
        else:
            self.z_math = self.z.astype(np.float64)
        self.z.flags.writeable = False
        self.z_math.flags.writeable = False

    @property
    def count(self) -> int:
        return self.z.shape[0]


@dataclass(frozen=True)
class TransformedQuery:
    """A context vector lifted to [h; 1; 0] with its squared norm cached."""

    h_tilde: np.ndarray  # (d+2,) float64
    h_norm_sq: float

    @property
    def source_dim(self) -> int:
        return self.h_tilde.shape[0] - 2


def compute_bound(
    projection: VocabularyProjection,
    mode: str = BOUND_MAX_ROW_NORM,
    explicit_value: float | None = None,
) -> TransformBound:
    """Compute the norm bound U for a projection.

    The default mode takes the smallest valid bound, max_i |[w_i; b_i]|;
    any larger explicit value is accepted and simply fattens the sphere.
    """
    w64 = projection.weights.astype(np.float64)
    b64 = projection.biases.astype(np.float64)
    norms_sq = np.einsum("ij,ij->i", w64, w64) + b64 * b64
    max_sq = float(norms_sq.max())
    max_row_norm = float(np.sqrt(max_sq))
    if max_row_norm == 0.0:
        raise ValidationError("degenerate projection: every weight row and bias is zero")
    if mode == BOUND_MAX_ROW_NORM:
        return TransformBound(U=max_row_norm, mode=mode, max_row_norm=max_row_norm, u_sq=max_sq)
    if mode == BOUND_EXPLICIT:
        if explicit_value is None:
            raise ValidationError("explicit bound mode requires explicit_value")
        if explicit_value < max_row_norm:
            raise ValidationError(
                f"explicit_value {explicit_value} is below the max augmented "
                f"row norm {max_row_norm}"
            )
        return TransformBound(U=float(explicit_value), mode=mode, max_row_norm=max_row_norm)
    raise ValidationError(f"unknown bound mode {mode!r}")


def transform_points(
    projection: VocabularyProjection,
    bound: TransformBound,
    dtype: np.dtype | type = np.float32,
) -> TransformedPoints:
    """Lift every word row onto the sphere of radius bound.U."""
    dtype = np.dtype(dtype)
    if dtype not in (np.dtype(np.float32), np.dtype(np.float64)):
        raise ValidationError("points dtype must be float32 or float64")
    w64 = projection.weights.astype(np.float64)
    b64 = projection.biases.astype(np.float64)
    u_sq = bound.u_sq
    radicand = u_sq - np.einsum("ij,ij->i", w64, w64) - b64 * b64
    worst = float(radicand.min())
    if worst < -_RADICAND_SLACK * u_sq:
        raise ValidationError(
            f"bound U={bound.U} is inconsistent with the projection "
            f"(radicand {worst} at word {int(radicand.argmin())})"
        )
    np.clip(radicand, 0.0, None, out=radicand)
    z64 = np.empty((projection.vocab_size, projection.dim + 2), dtype=np.float64)
    z64[:, : projection.dim] = w64
    z64[:, projection.dim] = b64
    z64[:, projection.dim + 1] = np.sqrt(radicand)
    z = z64 if dtype == np.float64 else z64.astype(np.float32)
    return TransformedPoints(z=z, bound=bound, source_dim=projection.dim)


def transform_query(h: np.ndarray) -> TransformedQuery:
    """Lift a context vector h to [h; 1; 0]."""
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 1 or h.shape[0] < 1:
        raise ValidationError("query must be a non-empty 1-D vector")
    if not np.isfinite(h).all():
        bad = int(np.flatnonzero(~np.isfinite(h))[0])
        raise ValidationError(f"non-finite query entry at position {bad}")
    h_tilde = np.empty(h.shape[0] + 2, dtype=np.float64)
    h_tilde[: h.shape[0]] = h
    h_tilde[h.shape[0]] = 1.0
    h_tilde[h.shape[0] + 1] = 0.0
    h_tilde.flags.writeable = False
    return TransformedQuery(h_tilde=h_tilde, h_norm_sq=float(h @ h))


def squared_distance(z_row: np.ndarray, query: TransformedQuery) -> float:
    """Squared Euclidean distance between one lifted word and a lifted query."""
    z_row = np.asarray(z_row, dtype=np.float64)
    if z_row.shape != query.h_tilde.shape:
        raise ValidationError(
            f"dimension mismatch: point has {z_row.shape[0]} coords, "
            f"query has {query.h_tilde.shape[0]}"
        )
    diff = z_row - query.h_tilde
    return float(diff @ diff)


def distance_to_logit(
    dist_sq: float | np.ndarray, bound: TransformBound, h_norm_sq: float
) -> float | np.ndarray:
    """Invert a squared distance back to the exact logit w_i . h + b_i."""
    return (bound.u_sq + h_norm_sq + 1.0 - dist_sq) / 2.0


def metric_rho(i: int, j: int, points: TransformedPoints) -> float:
    """Word-to-word metric: Euclidean distance between lifted vectors."""
    n = points.count
    if not (0 <= i < n and 0 <= j < n):
        raise ValidationError(f"word ids ({i}, {j}) out of range for {n} words")
    diff = points.z_math[i] - points.z_math[j]
    return float(np.sqrt(diff @ diff))


def matching_value(word_id: int, points: TransformedPoints, query: TransformedQuery) -> float:
    """Distance (not squared) from a lifted word to a lifted query.

    This is the 1-Lipschitz matching function on the word metric space.
    """
    n = points.count
    if not (0 <= word_id < n):
        raise ValidationError(f"word id {word_id} out of range for {n} words")
    return float(np.sqrt(squared_distance(points.z_math[word_id], query)))
