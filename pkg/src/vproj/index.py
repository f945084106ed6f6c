"""Bundle of bound + lifted points + graph, with deterministic persistence.

Index file layout (little-endian), checksummed as a whole:

    magic  b"FGDI"
    version u32 = 1
    bound:  mode u8 (0 = max_augmented_row_norm, 1 = explicit)
            U f64, max_row_norm f64
    points: vocab u64, dim_plus_2 u32, then vocab * dim_plus_2 f32 values
    graph:  per-node level u8 array, then for each node in id order and
            each layer 0..level: count u16 followed by count u32 ids
    crc32 u32 over every preceding byte

Tokens are not stored; callers resolve them through the projection file.
The writer emits adjacency lists in their in-memory order, so identical
builds produce byte-identical files and load -> save is the identity.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import FormatError
from .graph import GraphParams, SmallWorldGraph, build_graph
from .projection import VocabularyProjection
from .transform import (
    BOUND_EXPLICIT,
    BOUND_MAX_ROW_NORM,
    TransformBound,
    TransformedPoints,
    compute_bound,
    transform_points,
)

_MAGIC = b"FGDI"
_VERSION = 1
_MODE_CODES = {BOUND_MAX_ROW_NORM: 0, BOUND_EXPLICIT: 1}
_MODE_NAMES = {v: k for k, v in _MODE_CODES.items()}


@dataclass
class SearchIndex:
    """Everything needed to answer queries: bound, lifted points, graph."""

    bound: TransformBound
    points: TransformedPoints
    graph: SmallWorldGraph

    @property
    def vocab_size(self) -> int:
        return self.points.count

    @property
    def dim(self) -> int:
        return self.points.source_dim

    @property
    def u(self) -> float:
        return self.bound.U


def build_index(
    projection: VocabularyProjection,
    params: GraphParams | None = None,
    bound_mode: str = BOUND_MAX_ROW_NORM,
    explicit_value: float | None = None,
    dtype: np.dtype | type = np.float32,
) -> SearchIndex:
    """Lift a projection and build the search graph over it."""
    bound = compute_bound(projection, mode=bound_mode, explicit_value=explicit_value)
    points = transform_points(projection, bound, dtype=dtype)
    graph = build_graph(points, params)
    return SearchIndex(bound=bound, points=points, graph=graph)


def save_index(index: SearchIndex, path: str) -> None:
    """Write the index file; always stores points at float32."""
    graph = index.graph
    n = index.vocab_size
    blob = bytearray()
    blob += _MAGIC
    blob += struct.pack("<I", _VERSION)
    blob += struct.pack(
        "<Bdd", _MODE_CODES[index.bound.mode], index.bound.U, index.bound.max_row_norm
    )
    blob += struct.pack("<QI", n, index.points.source_dim + 2)
    blob += np.ascontiguousarray(index.points.z, dtype="<f4").tobytes()
    blob += np.ascontiguousarray(graph.levels, dtype=np.uint8).tobytes()
    for i in range(n):
        for lst in graph.neighbors[i]:
            if len(lst) > 0xFFFF:
                raise FormatError(f"{path}: adjacency list at node {i} exceeds u16")
            blob += struct.pack("<H", len(lst))
            blob += np.asarray(lst, dtype="<u4").tobytes()
    blob += struct.pack("<I", zlib.crc32(bytes(blob)))
    try:
        with open(path, "wb") as fh:
            fh.write(bytes(blob))
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from None


def load_index(path: str) -> SearchIndex:
    """Read and checksum-verify an index file."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 8:
        raise FormatError(f"{path}: truncated header at offset {len(data)}")
    if data[:4] != _MAGIC:
        raise FormatError(f"{path}: bad magic {data[:4]!r}, expected {_MAGIC!r}")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != _VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if len(data) < 4 + 4 + 17 + 12 + 4:
        raise FormatError(f"{path}: truncated at offset {len(data)}")
    (stored_crc,) = struct.unpack_from("<I", data, len(data) - 4)
    actual_crc = zlib.crc32(data[:-4])
    if stored_crc != actual_crc:
        raise FormatError(
            f"{path}: checksum mismatch (stored {stored_crc:#010x}, "
            f"computed {actual_crc:#010x})"
        )
    offset = 8
    mode_code, u_value, max_row_norm = struct.unpack_from("<Bdd", data, offset)
    offset += 17
    if mode_code not in _MODE_NAMES:
        raise FormatError(f"{path}: unknown bound mode {mode_code}")
    bound = TransformBound(U=u_value, mode=_MODE_NAMES[mode_code], max_row_norm=max_row_norm)
    vocab, dim_plus_2 = struct.unpack_from("<QI", data, offset)
    offset += 12
    if vocab < 1 or dim_plus_2 < 3:
        raise FormatError(f"{path}: bad dimensions vocab={vocab} dim+2={dim_plus_2}")
    point_bytes = vocab * dim_plus_2 * 4
    if offset + point_bytes + vocab > len(data) - 4:
        raise FormatError(f"{path}: truncated points section at offset {offset}")
    z = (
        np.frombuffer(data, dtype="<f4", count=vocab * dim_plus_2, offset=offset)
        .reshape(vocab, dim_plus_2)
        .copy()
    )
    offset += point_bytes
    levels = np.frombuffer(data, dtype=np.uint8, count=vocab, offset=offset).astype(np.int64)
    offset += vocab
    neighbors: list[list[list[int]]] = []
    for i in range(vocab):
        per_node: list[list[int]] = []
        for _layer in range(int(levels[i]) + 1):
            if offset + 2 > len(data) - 4:
                raise FormatError(f"{path}: truncated adjacency at offset {offset}")
            (count,) = struct.unpack_from("<H", data, offset)
            offset += 2
            if offset + count * 4 > len(data) - 4:
                raise FormatError(f"{path}: truncated adjacency at offset {offset}")
            ids = np.frombuffer(data, dtype="<u4", count=count, offset=offset)
            offset += count * 4
            per_node.append([int(x) for x in ids])
        neighbors.append(per_node)
    if offset != len(data) - 4:
        raise FormatError(f"{path}: {len(data) - 4 - offset} trailing bytes before checksum")
    max_level = int(levels.max())
    entry_point = int(np.flatnonzero(levels == max_level)[0])
    points = TransformedPoints(z=z, bound=bound, source_dim=dim_plus_2 - 2)
    graph = SmallWorldGraph(
        levels=levels, neighbors=neighbors, entry_point=entry_point, node_count=vocab
    )
    return SearchIndex(bound=bound, points=points, graph=graph)
