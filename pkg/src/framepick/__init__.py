"""framepick: query-aware key-frame selection.

Given n frame embeddings and a query embedding, pick k frame indices that
balance query relevance, list-wise diversity, and temporal sequentiality.
Relevance-conditioned multi-Gaussian kernels feed greedy DPP MAP inference,
and a dynamic program allocates the budget across temporal segments.
"""

from .allocate import (DPTable, SegmentPlan, SelectionResult, allocate_and_select,
                       make_segments, run_allocation, score_of,
                       sequential_map_fixed_sizes)
from .errors import InputError, NumericalError, SelectionError
from .greedy import (ConditionalContext, GreedyState, conditional_greedy_map,
                     conditional_offset, greedy_map, logdet_psd, run_greedy)
from .kernels import (DEFAULT_LAMBDA, ConditionedKernel, EmbeddingSet, KernelSpec,
                      build_relevance, build_similarity, condition_kernel,
                      multi_gaussian, pool_query_chunks)
from .selectors import (DEFAULT_SEGMENT_SIZE, METHODS, SelectionRequest, select,
                        topk_indices, uniform_indices)

__version__ = "0.1.0"

__all__ = [
    "ConditionalContext",
    "ConditionedKernel",
    "DEFAULT_LAMBDA",
    "DEFAULT_SEGMENT_SIZE",
    "DPTable",
    "EmbeddingSet",
    "GreedyState",
    "InputError",
    "KernelSpec",
    "METHODS",
    "NumericalError",
    "SegmentPlan",
    "SelectionError",
    "SelectionRequest",
    "SelectionResult",
    "allocate_and_select",
    "build_relevance",
    "build_similarity",
    "condition_kernel",
    "conditional_greedy_map",
    "conditional_offset",
    "greedy_map",
    "logdet_psd",
    "make_segments",
    "multi_gaussian",
    "pool_query_chunks",
    "run_allocation",
    "run_greedy",
    "score_of",
    "select",
    "sequential_map_fixed_sizes",
    "topk_indices",
    "uniform_indices",
    "__version__",
]
