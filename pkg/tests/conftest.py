import numpy as np
import pytest

from vproj import VocabularyProjection


@pytest.fixture
def two_word_projection():
    """d=1 fixture with hand-checkable numbers: U^2 = 1.25, logits 2.0 / -1.5
    for the query h = (2)."""
    return VocabularyProjection(
        tokens=["apple", "banana"],
        weights=np.array([[1.0], [-1.0]], dtype=np.float32),
        biases=np.array([0.0, 0.5], dtype=np.float32),
    )


@pytest.fixture
def two_word_text(tmp_path):
    path = tmp_path / "two.txt"
    path.write_text("2 2\napple 1.0 0.0 0.1\nbanana 0.0 1.0 -0.1\n")
    return str(path)


def random_projection(rng, vocab_size, dim, bias_scale=1.0):
    """Gaussian weights and biases with unique tokens, for property tests."""
    return VocabularyProjection(
        tokens=[f"w{i}" for i in range(vocab_size)],
        weights=rng.standard_normal((vocab_size, dim)).astype(np.float32),
        biases=(bias_scale * rng.standard_normal(vocab_size)).astype(np.float32),
    )
