"""Synthetic projections, frequency tables, and query sets for evaluation.

Trained projection layers are not isotropic clouds: related words sit near
each other and contexts land near the words they predict. The generator
mirrors that with a latent-topic construction. Each word row is

    w_i = sqrt(share) * center(topic_i) + sqrt(1 - share) * noise_i

with unit-Gaussian centers and noise, so every weight entry is exactly
unit Gaussian while words in one topic stay correlated. Queries are unit
Gaussian perturbations of uniformly chosen word rows, the decodable-context
regime, and are therefore marginally Gaussian as well.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .projection import FrequencyTable, VocabularyProjection

DIST_GAUSSIAN = "gaussian"
DIST_ZIPF = "zipf_scaled_gaussian"

_ZIPF_EXPONENT = 1.0
_TOPIC_SHARE = 0.75  # fraction of a row's variance owned by its topic center
_WORDS_PER_TOPIC = 100


def synth_dataset(
    vocab_size: int,
    dim: int,
    distribution: str = DIST_GAUSSIAN,
    seed: int = 0,
    n_queries: int = 100,
) -> tuple[VocabularyProjection, FrequencyTable, np.ndarray]:
    """Deterministic stand-in for a trained projection layer.

    gaussian: topic-correlated rows with unit-Gaussian entries, unit
    Gaussian biases, uniform frequencies. zipf_scaled_gaussian: the same
    base with row norms and biases scaled by Zipf rank weights, plus a
    matching Zipf frequency table (monotone non-increasing in id).
    """
    if vocab_size < 1 or dim < 1 or n_queries < 0:
        raise ValidationError("vocab_size and dim must be >= 1, n_queries >= 0")
    if distribution not in (DIST_GAUSSIAN, DIST_ZIPF):
        raise ValidationError(f"unknown distribution {distribution!r}")
    rng = np.random.default_rng(seed)
    tokens = [f"w{i}" for i in range(vocab_size)]
    n_topics = max(1, vocab_size // _WORDS_PER_TOPIC)
    centers = rng.standard_normal((n_topics, dim))
    topics = rng.integers(0, n_topics, size=vocab_size)
    weights = np.sqrt(_TOPIC_SHARE) * centers[topics]
    weights += np.sqrt(1.0 - _TOPIC_SHARE) * rng.standard_normal((vocab_size, dim))
    biases = rng.standard_normal(vocab_size)
    if distribution == DIST_GAUSSIAN:
        counts = np.ones(vocab_size, dtype=np.float64)
    else:
        zipf = (np.arange(1, vocab_size + 1, dtype=np.float64)) ** -_ZIPF_EXPONENT
        weights *= zipf[:, None]
        biases *= zipf
        counts = zipf.copy()
    projection = VocabularyProjection(
        tokens, weights.astype(np.float32), biases.astype(np.float32)
    )
    anchors = rng.integers(0, vocab_size, size=n_queries)
    queries = weights[anchors] + rng.standard_normal((n_queries, dim))
    return projection, FrequencyTable(counts), queries


def load_queries(path: str, dim: int | None = None) -> np.ndarray:
    """Read one whitespace-separated query vector per line."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = [float(x) for x in line.split()]
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: not a number") from None
            if dim is not None and len(row) != dim:
                raise ValidationError(
                    f"{path}:{lineno}: expected {dim} values, found {len(row)}"
                )
            rows.append(row)
    if not rows:
        raise ValidationError(f"{path}: no queries")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValidationError(f"{path}: inconsistent row widths {sorted(widths)}")
    return np.asarray(rows, dtype=np.float64)


def save_queries(queries: np.ndarray, path: str) -> None:
    """Write one query vector per line, 9 significant digits."""
    queries = np.asarray(queries, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        for row in queries:
            fh.write(" ".join(f"{x:.9g}" for x in row) + "\n")
