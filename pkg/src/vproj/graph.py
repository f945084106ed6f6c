"""Layered navigable small-world graph over the lifted word vectors.

Construction inserts words in id order. Each word draws a maximum layer
from the seeded SplitMix64 stream as floor(-ln(u) * level_mult), greedily
descends from the entry point to its top layer, then connects at each layer
to a diversity-pruned subset of the ef_construction nearest candidates: a
candidate is kept only if it is closer to the inserted word than to every
already-kept neighbor. Edges are bidirectional; an overfull neighbor list
is re-pruned with the same rule from that node's point of view.

The build is single-threaded and fully deterministic for fixed inputs,
parameters, and seed. Ties everywhere resolve to the smaller word id.
Search is read-only and any number of queries may run concurrently.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .rng import SplitMix64
from .transform import TransformedPoints, TransformedQuery

# Persisted node levels are a u8 array; level_mult values sane enough to
# build a useful graph never get near this.
_MAX_LEVEL = 255


@dataclass(frozen=True)
class GraphParams:
    """Build-time knobs for the small-world graph."""

    m: int = 16
    m0: int | None = None  # defaults to 2 * m
    ef_construction: int = 200
    level_mult: float | None = None  # defaults to 1 / ln(m)
    seed: int = 42

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ValidationError("m must be >= 2")
        if self.m0 is not None and self.m0 < self.m:
            raise ValidationError("m0 must be >= m")
        if self.ef_construction < self.m:
            raise ValidationError("ef_construction must be >= m")
        if self.level_mult is not None and not (self.level_mult > 0):
            raise ValidationError("level_mult must be positive")
        if not (0 <= self.seed < 2**64):
            raise ValidationError("seed must fit in 64 bits")

    @property
    def m0_resolved(self) -> int:
        return self.m0 if self.m0 is not None else 2 * self.m

    @property
    def level_mult_resolved(self) -> float:
        return self.level_mult if self.level_mult is not None else 1.0 / math.log(self.m)


@dataclass
class SmallWorldGraph:
    """Adjacency structure produced by :func:`build_graph`.

    ``neighbors[node][layer]`` lists that node's neighbor ids at a layer;
    a node appears on layers 0..levels[node]. The entry point is the lowest
    id among nodes at the maximum level, which is exactly the node that
    claimed the top during insertion.
    """

    levels: np.ndarray  # (n,) small ints
    neighbors: list[list[list[int]]]
    entry_point: int
    node_count: int

    @property
    def max_level(self) -> int:
        return int(self.levels[self.entry_point])

    def check_structure(self) -> None:
        """Raise if a structural invariant is broken. Test/debug aid."""
        n = self.node_count
        if len(self.neighbors) != n or self.levels.shape[0] != n:
            raise ValidationError("node count mismatch")
        if int(self.levels.max()) != int(self.levels[self.entry_point]):
            raise ValidationError("entry point is not at the maximum level")
        for i in range(n):
            if len(self.neighbors[i]) != int(self.levels[i]) + 1:
                raise ValidationError(f"node {i} layer count != level + 1")
            for layer, lst in enumerate(self.neighbors[i]):
                if len(set(lst)) != len(lst):
                    raise ValidationError(f"duplicate neighbor at node {i} layer {layer}")
                for nb in lst:
                    if nb == i:
                        raise ValidationError(f"self loop at node {i} layer {layer}")
                    if not (0 <= nb < n):
                        raise ValidationError(f"neighbor {nb} out of range at node {i}")
                    if int(self.levels[nb]) < layer:
                        raise ValidationError(
                            f"node {i} layer {layer} links to {nb} which tops out lower"
                        )
        if not _reachable_mask(self, 0).all():
            raise ValidationError("layer 0 is not connected")


@dataclass
class SearchResult:
    """Ranked ids with squared distances, plus the distance-evaluation count."""

    ids: np.ndarray  # (k,) int64, sorted by (dist_sq, id)
    dists_sq: np.ndarray  # (k,) float64, aligned
    distance_evals: int


def _search_layer_impl(
    Z: np.ndarray,
    neighbors: list[list[list[int]]],
    layer: int,
    h_tilde: np.ndarray,
    entries: list[tuple[float, int]],
    ef: int,
) -> tuple[list[tuple[float, int]], int]:
    """Best-first search on one layer from precomputed entry candidates.

    Returns up to ef (dist_sq, id) pairs sorted ascending by (dist_sq, id)
    and the number of fresh distance evaluations. Visited-set semantics:
    no node's distance is computed twice.
    """
    visited = np.zeros(Z.shape[0], dtype=bool)
    cand: list[tuple[float, int]] = []
    best: list[tuple[float, int]] = []  # (-dist, -id): root is the worst kept
    for d, i in entries:
        visited[i] = True
        cand.append((d, i))
        best.append((-d, -i))
    heapq.heapify(cand)
    heapq.heapify(best)
    while len(best) > ef:
        heapq.heappop(best)
    evals = 0
    while cand:
        d_c, c = heapq.heappop(cand)
        if d_c > -best[0][0] and len(best) >= ef:
            break
        fresh = [nb for nb in neighbors[c][layer] if not visited[nb]]
        if not fresh:
            continue
        for nb in fresh:
            visited[nb] = True
        diffs = Z[fresh] - h_tilde
        dists = np.einsum("ij,ij->i", diffs, diffs)
        evals += len(fresh)
        for nb, d in zip(fresh, dists.tolist()):
            if len(best) < ef:
                heapq.heappush(cand, (d, nb))
                heapq.heappush(best, (-d, -nb))
            else:
                worst_d, neg_worst_id = best[0]
                if d < -worst_d or (d == -worst_d and nb < -neg_worst_id):
                    heapq.heappush(cand, (d, nb))
                    heapq.heapreplace(best, (-d, -nb))
    out = [(-nd, -ni) for nd, ni in best]
    out.sort()
    return out, evals


def _select_diverse(cand_mat: np.ndarray, cand_dists: np.ndarray, m: int) -> list[int]:
    """Indices of candidates kept by the diversity rule, at most m.

    Candidates must arrive sorted ascending by (distance-to-base, id). One
    is kept only when it is strictly closer to the base than to every
    already-kept candidate.
    """
    count = cand_mat.shape[0]
    if count == 0:
        return []
    norms = np.einsum("ij,ij->i", cand_mat, cand_mat)
    kept: list[int] = []
    min_to_kept = np.full(count, np.inf)
    for idx in range(count):
        if len(kept) == m:
            break
        if kept and cand_dists[idx] >= min_to_kept[idx]:
            continue
        kept.append(idx)
        to_new = norms + norms[idx] - 2.0 * (cand_mat @ cand_mat[idx])
        np.minimum(min_to_kept, to_new, out=min_to_kept)
    return kept


def _prune_neighbors(Z: np.ndarray, node: int, ids: list[int], m: int) -> list[int]:
    """Re-select at most m of a node's neighbors with the diversity rule."""
    arr = np.asarray(ids, dtype=np.int64)
    diffs = Z[arr] - Z[node]
    dists = np.einsum("ij,ij->i", diffs, diffs)
    order = np.lexsort((arr, dists))
    arr = arr[order]
    kept = _select_diverse(Z[arr], dists[order], m)
    return [int(arr[p]) for p in kept]


def build_graph(points: TransformedPoints, params: GraphParams | None = None) -> SmallWorldGraph:
    """Build the layered graph over lifted points, deterministically."""
    if params is None:
        params = GraphParams()
    Z = points.z_math
    n = points.count
    if n < 1:
        raise ValidationError("cannot build a graph over zero points")
    rng = SplitMix64(params.seed)
    mult = params.level_mult_resolved
    levels = np.array(
        [min(int(-math.log(rng.uniform()) * mult), _MAX_LEVEL) for _ in range(n)],
        dtype=np.int64,
    )
    neighbors: list[list[list[int]]] = [
        [[] for _ in range(int(levels[i]) + 1)] for i in range(n)
    ]
    m0 = params.m0_resolved
    entry = 0
    top = int(levels[0])
    for i in range(1, n):
        li = int(levels[i])
        zi = Z[i]
        diff = Z[entry] - zi
        eps: list[tuple[float, int]] = [(float(diff @ diff), entry)]
        for layer in range(top, li, -1):
            eps, _ = _search_layer_impl(Z, neighbors, layer, zi, eps, 1)
        for layer in range(min(li, top), -1, -1):
            res, _ = _search_layer_impl(Z, neighbors, layer, zi, eps, params.ef_construction)
            m_layer = m0 if layer == 0 else params.m
            cand_ids = np.fromiter((cid for _, cid in res), dtype=np.int64, count=len(res))
            cand_dists = np.fromiter((cd for cd, _ in res), dtype=np.float64, count=len(res))
            kept = _select_diverse(Z[cand_ids], cand_dists, m_layer)
            selected = [int(cand_ids[p]) for p in kept]
            neighbors[i][layer] = selected
            for s in selected:
                lst = neighbors[s][layer]
                lst.append(i)
                if len(lst) > m_layer:
                    neighbors[s][layer] = _prune_neighbors(Z, s, lst, m_layer)
            eps = res
        if li > top:
            entry = i
            top = li
    graph = SmallWorldGraph(levels=levels, neighbors=neighbors, entry_point=entry, node_count=n)
    _repair_connectivity(graph, Z)
    return graph


def _reachable_mask(graph: SmallWorldGraph, layer: int) -> np.ndarray:
    """Nodes reachable from the entry point along one layer's edges."""
    n = graph.node_count
    reached = np.zeros(n, dtype=bool)
    stack = [graph.entry_point]
    reached[graph.entry_point] = True
    nbrs = graph.neighbors
    while stack:
        c = stack.pop()
        for nb in nbrs[c][layer] if layer < len(nbrs[c]) else []:
            if not reached[nb]:
                reached[nb] = True
                stack.append(nb)
    return reached


def _repair_connectivity(graph: SmallWorldGraph, Z: np.ndarray) -> None:
    """Reconnect any layer-0 component cut off by aggressive pruning.

    Each orphan component gains one edge joining its closest (reached,
    orphan) pair. Repair edges may push a list past the m0 cap; search
    correctness needs reachability more than it needs the cap.
    """
    n = graph.node_count
    if n <= 1:
        return
    reached = _reachable_mask(graph, 0)
    if reached.all():
        return
    while not reached.all():
        seed = int(np.flatnonzero(~reached)[0])
        comp = [seed]
        in_comp = {seed}
        stack = [seed]
        while stack:
            c = stack.pop()
            for nb in graph.neighbors[c][0]:
                if not reached[nb] and nb not in in_comp:
                    in_comp.add(nb)
                    comp.append(nb)
                    stack.append(nb)
        reached_ids = np.flatnonzero(reached)
        best: tuple[float, int, int] | None = None
        for o in sorted(comp):
            diffs = Z[reached_ids] - Z[o]
            dists = np.einsum("ij,ij->i", diffs, diffs)
            pos = int(np.lexsort((reached_ids, dists))[0])
            cand = (float(dists[pos]), int(reached_ids[pos]), o)
            if best is None or cand < best:
                best = cand
        _, r_star, o_star = best
        graph.neighbors[o_star][0].append(r_star)
        graph.neighbors[r_star][0].append(o_star)
        for o in comp:
            reached[o] = True


def search_layer(
    graph: SmallWorldGraph,
    points: TransformedPoints,
    query: TransformedQuery,
    entry: int,
    ef: int,
    layer: int,
) -> SearchResult:
    """Best-first search on one layer starting from a single entry node."""
    _check_query_dim(points, query)
    if not (0 <= entry < graph.node_count):
        raise ValidationError(f"entry {entry} out of range")
    if layer < 0 or layer > int(graph.levels[entry]):
        raise ValidationError(f"entry {entry} does not exist on layer {layer}")
    if ef < 1:
        raise ValidationError("ef must be >= 1")
    Z = points.z_math
    diff = Z[entry] - query.h_tilde
    entries = [(float(diff @ diff), entry)]
    out, evals = _search_layer_impl(Z, graph.neighbors, layer, query.h_tilde, entries, ef)
    return _to_result(out, evals + 1)


def search_topk(
    graph: SmallWorldGraph,
    points: TransformedPoints,
    query: TransformedQuery,
    k: int,
    ef_search: int,
) -> SearchResult:
    """Approximate top-k: greedy descent, then a layer-0 sweep at ef_search."""
    _check_query_dim(points, query)
    n = graph.node_count
    if not (1 <= k <= n):
        raise ValidationError(f"k={k} out of range for {n} words")
    if ef_search < k:
        raise ValidationError(f"ef_search={ef_search} must be >= k={k}")
    Z = points.z_math
    h = query.h_tilde
    diff = Z[graph.entry_point] - h
    eps: list[tuple[float, int]] = [(float(diff @ diff), graph.entry_point)]
    evals = 1
    for layer in range(graph.max_level, 0, -1):
        eps, e = _search_layer_impl(Z, graph.neighbors, layer, h, eps, 1)
        evals += e
    out, e0 = _search_layer_impl(Z, graph.neighbors, 0, h, eps, ef_search)
    evals += e0
    return _to_result(out[:k], evals)


def flat_search(points: TransformedPoints, query: TransformedQuery, k: int) -> SearchResult:
    """Exact top-k by scanning every lifted point once."""
    _check_query_dim(points, query)
    n = points.count
    if not (1 <= k <= n):
        raise ValidationError(f"k={k} out of range for {n} words")
    Z = points.z_math
    diffs = Z - query.h_tilde
    dists = np.einsum("ij,ij->i", diffs, diffs)
    order = np.lexsort((np.arange(n), dists))[:k]
    return SearchResult(
        ids=order.astype(np.int64),
        dists_sq=dists[order],
        distance_evals=n,
    )


def _check_query_dim(points: TransformedPoints, query: TransformedQuery) -> None:
    if query.h_tilde.shape[0] != points.z.shape[1]:
        raise ValidationError(
            f"dimension mismatch: index holds {points.source_dim}-dim words, "
            f"query has {query.source_dim} dims"
        )


def _to_result(pairs: list[tuple[float, int]], evals: int) -> SearchResult:
    ids = np.fromiter((i for _, i in pairs), dtype=np.int64, count=len(pairs))
    dists = np.fromiter((d for d, _ in pairs), dtype=np.float64, count=len(pairs))
    return SearchResult(ids=ids, dists_sq=dists, distance_evals=evals)
