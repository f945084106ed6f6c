"""Top-K vocabulary projection via metric-space reduction and graph search.

The pipeline: load a projection layer, lift its rows onto a sphere so that
squared Euclidean distance ranks exactly like logits, build a navigable
small-world graph over the lifted points, then answer queries by graph
search, recover exact logits from distances in O(1), and optionally smooth
the top-k probabilities into a full-vocabulary distribution.
"""

from .decode import MODE_FLAT, MODE_GRAPH, TopKResult, batch_decode, decode_topk, softmax
from .errors import FormatError, ValidationError, VprojError
from .evaluate import EvalReport, QueryRecord, run_eval
from .graph import (
    GraphParams,
    SearchResult,
    SmallWorldGraph,
    build_graph,
    flat_search,
    search_layer,
    search_topk,
)
from .index import SearchIndex, build_index, load_index, save_index
from .oracle import oracle_topk, precision_at_k
from .projection import (
    FrequencyTable,
    VocabularyProjection,
    load_frequencies,
    load_projection,
    save_frequencies,
    save_projection,
)
from .smoothing import (
    ConsistencyReport,
    SmoothedDistribution,
    check_consistency,
    smooth_consistent,
    smooth_laplacian,
    smooth_winners_take_all,
)
from .synth import DIST_GAUSSIAN, DIST_ZIPF, load_queries, save_queries, synth_dataset
from .transform import (
    BOUND_EXPLICIT,
    BOUND_MAX_ROW_NORM,
    TransformBound,
    TransformedPoints,
    TransformedQuery,
    compute_bound,
    distance_to_logit,
    matching_value,
    metric_rho,
    squared_distance,
    transform_points,
    transform_query,
)

__version__ = "0.1.0"

__all__ = [
    "BOUND_EXPLICIT",
    "BOUND_MAX_ROW_NORM",
    "ConsistencyReport",
    "DIST_GAUSSIAN",
    "DIST_ZIPF",
    "EvalReport",
    "FormatError",
    "FrequencyTable",
    "GraphParams",
    "MODE_FLAT",
    "MODE_GRAPH",
    "QueryRecord",
    "SearchIndex",
    "SearchResult",
    "SmallWorldGraph",
    "SmoothedDistribution",
    "TopKResult",
    "TransformBound",
    "TransformedPoints",
    "TransformedQuery",
    "ValidationError",
    "VocabularyProjection",
    "VprojError",
    "batch_decode",
    "build_graph",
    "build_index",
    "check_consistency",
    "compute_bound",
    "decode_topk",
    "distance_to_logit",
    "flat_search",
    "load_frequencies",
    "load_index",
    "load_projection",
    "load_queries",
    "matching_value",
    "metric_rho",
    "oracle_topk",
    "precision_at_k",
    "run_eval",
    "save_frequencies",
    "save_index",
    "save_projection",
    "save_queries",
    "search_layer",
    "search_topk",
    "smooth_consistent",
    "smooth_laplacian",
    "smooth_winners_take_all",
    "softmax",
    "squared_distance",
    "synth_dataset",
    "transform_points",
    "transform_query",
]
