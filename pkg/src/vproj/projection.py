"""Vocabulary projection storage: tokens, weight rows, biases, word frequencies.

Two on-disk formats are supported. The text format is a word2vec-style
listing, one word per line:

    <vocab_size> <dim> <has_bias:0|1>
    <token> <w_1> ... <w_dim> [<bias>]

The ``has_bias`` header field is written on save but may be omitted in
hand-made files, in which case bias presence is inferred from the first
data row. The binary format is little-endian: magic ``FGDP``, version u32,
vocab_size u64, dim u32, flags u32 (bit 0 = has_bias), then per word a u16
token byte length plus UTF-8 bytes, then all weights as f32 row-major, then
(if flagged) all biases as f32.

Word ids are 0-based file positions. Every other module speaks ids, never
tokens. Weights are held at float32; norms and dot products downstream
accumulate at float64.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, ValidationError

_MAGIC = b"FGDP"
_VERSION = 1


@dataclass
class VocabularyProjection:
    """A trained projection layer: |V| tokens with weight rows and biases."""

    tokens: list[str]
    weights: np.ndarray  # (|V|, d) float32
    biases: np.ndarray  # (|V|,) float32

    def __post_init__(self) -> None:
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float32)
        self.biases = np.ascontiguousarray(self.biases, dtype=np.float32)
        if self.weights.ndim != 2:
            raise ValidationError("weights must be a 2-D matrix")
        if self.weights.shape[0] < 1 or self.weights.shape[1] < 1:
            raise ValidationError("projection needs vocab_size >= 1 and dim >= 1")
        if len(self.tokens) != self.weights.shape[0]:
            raise ValidationError(
                f"token count {len(self.tokens)} != weight rows {self.weights.shape[0]}"
            )
        if self.biases.shape != (self.weights.shape[0],):
            raise ValidationError(
                f"bias length {self.biases.shape} != vocab size {self.weights.shape[0]}"
            )
        if not np.isfinite(self.weights).all():
            bad = np.argwhere(~np.isfinite(self.weights))[0]
            raise ValidationError(f"non-finite weight at word {bad[0]}, column {bad[1]}")
        if not np.isfinite(self.biases).all():
            bad = int(np.flatnonzero(~np.isfinite(self.biases))[0])
            raise ValidationError(f"non-finite bias at word {bad}")
        seen: dict[str, int] = {}
        for i, tok in enumerate(self.tokens):
            if not tok:
                raise ValidationError(f"empty token at word {i}")
            if tok in seen:
                raise ValidationError(f"duplicate token {tok!r} at words {seen[tok]} and {i}")
            seen[tok] = i
        self._token_to_id = seen
        self.weights.flags.writeable = False
        self.biases.flags.writeable = False

    @property
    def vocab_size(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    @property
    def has_bias(self) -> bool:
        return bool(np.any(self.biases != 0.0))

    def token_id(self, token: str) -> int:
        try:
            return self._token_to_id[token]
        except KeyError:
            raise ValidationError(f"unknown token {token!r}") from None


@dataclass
class FrequencyTable:
    """Word counts aligned to projection id order, plus their normalization."""

    counts: np.ndarray  # (|V|,) float64, >= 0
    normalized: np.ndarray = field(init=False)  # f, sums to 1

    def __post_init__(self) -> None:
        self.counts = np.ascontiguousarray(self.counts, dtype=np.float64)
        if self.counts.ndim != 1 or self.counts.shape[0] < 1:
            raise ValidationError("counts must be a non-empty vector")
        if not np.isfinite(self.counts).all():
            raise ValidationError("non-finite count")
        if np.any(self.counts < 0):
            bad = int(np.flatnonzero(self.counts < 0)[0])
            raise ValidationError(f"negative count at word {bad}")
        total = float(self.counts.sum())
        if total <= 0.0:
            raise ValidationError("all counts are zero")
        self.normalized = self.counts / total
        self.counts.flags.writeable = False
        self.normalized.flags.writeable = False

    @property
    def vocab_size(self) -> int:
        return self.counts.shape[0]


def _parse_float(text: str, path: str, lineno: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise FormatError(f"{path}:{lineno}: not a number: {text!r}") from None
    if not np.isfinite(value):
        raise FormatError(f"{path}:{lineno}: non-finite value {text!r}")
    return value


def _load_text(path: str) -> VocabularyProjection:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].strip():
        raise FormatError(f"{path}: empty file")
    header = lines[0].split()
    if len(header) not in (2, 3):
        raise FormatError(f"{path}:1: malformed header (expected '<vocab> <dim> [<has_bias>]')")
    try:
        vocab_size, dim = int(header[0]), int(header[1])
    except ValueError:
        raise FormatError(f"{path}:1: malformed header: {lines[0]!r}") from None
    if vocab_size < 1 or dim < 1:
        raise FormatError(f"{path}:1: vocab_size and dim must be positive")
    has_bias: bool | None = None
    if len(header) == 3:
        if header[2] not in ("0", "1"):
            raise FormatError(f"{path}:1: has_bias flag must be 0 or 1, got {header[2]!r}")
        has_bias = header[2] == "1"

    rows = [(no, ln) for no, ln in enumerate(lines[1:], start=2) if ln.strip()]
    if len(rows) != vocab_size:
        raise FormatError(f"{path}: header says {vocab_size} words, found {len(rows)} rows")

    tokens: list[str] = []
    weights = np.empty((vocab_size, dim), dtype=np.float32)
    biases = np.zeros(vocab_size, dtype=np.float32)
    for i, (lineno, line) in enumerate(rows):
        fields = line.split()
        if has_bias is None:
            # Header omitted the flag; the first row fixes it.
            if len(fields) == dim + 1:
                has_bias = False
            elif len(fields) == dim + 2:
                has_bias = True
            else:
                raise FormatError(f"{path}: row length mismatch at line {lineno}")
        expected = dim + (2 if has_bias else 1)
        if len(fields) != expected:
            raise FormatError(f"{path}: row length mismatch at line {lineno}")
        tokens.append(fields[0])
        weights[i] = [_parse_float(f, path, lineno) for f in fields[1 : dim + 1]]
        if has_bias:
            biases[i] = _parse_float(fields[dim + 1], path, lineno)
    try:
        return VocabularyProjection(tokens, weights, biases)
    except ValidationError as exc:
        raise FormatError(f"{path}: {exc}") from None


def _load_binary(path: str) -> VocabularyProjection:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) == 0:
        raise FormatError(f"{path}: empty file")
    if len(data) < 24:
        raise FormatError(f"{path}: truncated header at offset {len(data)}")
    if data[:4] != _MAGIC:
        raise FormatError(f"{path}: bad magic {data[:4]!r}, expected {_MAGIC!r}")
    version, vocab_size, dim, flags = struct.unpack_from("<IQII", data, 4)
    if version != _VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if vocab_size < 1 or dim < 1:
        raise FormatError(f"{path}: vocab_size and dim must be positive")
    has_bias = bool(flags & 1)
    offset = 24
    tokens = []
    for i in range(vocab_size):
        if offset + 2 > len(data):
            raise FormatError(f"{path}: truncated token table at offset {offset}")
        (tlen,) = struct.unpack_from("<H", data, offset)
        offset += 2
        if offset + tlen > len(data):
            raise FormatError(f"{path}: truncated token {i} at offset {offset}")
        try:
            tokens.append(data[offset : offset + tlen].decode("utf-8"))
        except UnicodeDecodeError:
            raise FormatError(f"{path}: invalid UTF-8 in token {i} at offset {offset}") from None
        offset += tlen
    need = vocab_size * dim * 4 + (vocab_size * 4 if has_bias else 0)
    if offset + need != len(data):
        raise FormatError(
            f"{path}: expected {need} bytes of vector data at offset {offset}, "
            f"found {len(data) - offset}"
        )
    weights = np.frombuffer(
        data, dtype="<f4", count=vocab_size * dim, offset=offset
    ).reshape(vocab_size, dim)
    offset += vocab_size * dim * 4
    if has_bias:
        biases = np.frombuffer(data, dtype="<f4", count=vocab_size, offset=offset)
    else:
        biases = np.zeros(vocab_size, dtype=np.float32)
    try:
        return VocabularyProjection(tokens, weights.copy(), np.array(biases, dtype=np.float32))
    except ValidationError as exc:
        raise FormatError(f"{path}: {exc}") from None


def load_projection(path: str, format: str = "text") -> VocabularyProjection:
    """Load and validate a projection file in the named format."""
    if format == "text":
        return _load_text(path)
    if format in ("binary", "bin"):
        return _load_binary(path)
    raise ValidationError(f"unknown projection format {format!r}")


def save_projection(projection: VocabularyProjection, path: str, format: str = "text") -> None:
    """Write a projection file parseable by :func:`load_projection`.

    Binary round-trips bit for bit; text round-trips exactly at float32
    because values are printed with 9 significant digits.
    """
    if format == "text":
        has_bias = projection.has_bias
        for i, tok in enumerate(projection.tokens):
            if any(c.isspace() for c in tok):
                raise FormatError(
                    f"{path}: token {tok!r} at word {i} contains whitespace, "
                    "not representable in the text format"
                )
        try:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(f"{projection.vocab_size} {projection.dim} {int(has_bias)}\n")
                for i, tok in enumerate(projection.tokens):
                    row = " ".join(f"{w:.9g}" for w in projection.weights[i])
                    if has_bias:
                        fh.write(f"{tok} {row} {projection.biases[i]:.9g}\n")
                    else:
                        fh.write(f"{tok} {row}\n")
        except OSError as exc:
            raise FormatError(f"{path}: {exc}") from None
    elif format in ("binary", "bin"):
        has_bias = projection.has_bias
        blob = bytearray()
        blob += _MAGIC
        blob += struct.pack(
            "<IQII", _VERSION, projection.vocab_size, projection.dim, int(has_bias)
        )
        for tok in projection.tokens:
            raw = tok.encode("utf-8")
            if len(raw) > 0xFFFF:
                raise FormatError(f"{path}: token longer than 65535 bytes")
            blob += struct.pack("<H", len(raw))
            blob += raw
        blob += np.ascontiguousarray(projection.weights, dtype="<f4").tobytes()
        if has_bias:
            blob += np.ascontiguousarray(projection.biases, dtype="<f4").tobytes()
        try:
            with open(path, "wb") as fh:
                fh.write(blob)
        except OSError as exc:
            raise FormatError(f"{path}: {exc}") from None
    else:
        raise ValidationError(f"unknown projection format {format!r}")


def load_frequencies(
    path: str, projection: VocabularyProjection, floor: float = 1.0
) -> FrequencyTable:
    """Load ``<token> <count>`` lines aligned to projection id order.

    Tokens absent from the file receive ``floor`` as their count; tokens
    absent from the projection are an error, not silently dropped.
    Duplicate lines for one token accumulate.
    """
    if floor < 0:
        raise ValidationError("frequency floor must be >= 0")
    counts = np.full(projection.vocab_size, float(floor), dtype=np.float64)
    seen = np.zeros(projection.vocab_size, dtype=bool)
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            fields = line.split()
            if len(fields) != 2:
                raise FormatError(f"{path}:{lineno}: expected '<token> <count>'")
            token, raw = fields
            if token not in projection._token_to_id:
                raise FormatError(f"{path}:{lineno}: unknown token {token!r}")
            value = _parse_float(raw, path, lineno)
            if value < 0:
                raise FormatError(f"{path}:{lineno}: negative count {raw}")
            wid = projection._token_to_id[token]
            if seen[wid]:
                counts[wid] += value
            else:
                counts[wid] = value
                seen[wid] = True
    try:
        return FrequencyTable(counts)
    except ValidationError as exc:
        raise FormatError(f"{path}: {exc}") from None


def save_frequencies(
    projection: VocabularyProjection, counts: np.ndarray, path: str
) -> None:
    """Write a ``<token> <count>`` file aligned to projection order."""
    counts = np.asarray(counts, dtype=np.float64)
    if counts.shape != (projection.vocab_size,):
        raise ValidationError("counts length must match vocab size")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for tok, c in zip(projection.tokens, counts):
                fh.write(f"{tok} {c:.9g}\n")
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from None
