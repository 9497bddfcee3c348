"""Selection façade: one interface over the segmented DP selector and the
baseline strategies it is compared against.

Methods
    mdp3         segmented conditional-DPP selection with DP budget allocation
    dpp          greedy DPP MAP over all frames, no segmentation
    topk         k highest frame-query relevances, ties to the lower index
    uniform      k evenly spaced indices, query-agnostic
    mdp3-mgk     mdp3 with relevance forced to all ones (query-agnostic)
    mdp3-cosine  mdp3 on shifted-cosine similarity/relevance instead of the
                 Gaussian kernel mixture
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .allocate import SelectionResult, allocate_and_select, make_segments
from .errors import InputError
from .greedy import greedy_map
from .kernels import DEFAULT_LAMBDA, ConditionedKernel, EmbeddingSet, KernelSpec, build_relevance

METHODS = ("mdp3", "dpp", "topk", "uniform", "mdp3-mgk", "mdp3-cosine")
DEFAULT_SEGMENT_SIZE = 32


@dataclass
class SelectionRequest:
    """One selection problem: embeddings, budget, method, and knobs."""

    emb: EmbeddingSet
    k: int
    method: str = "mdp3"
    lam: float = DEFAULT_LAMBDA
    m: int = DEFAULT_SEGMENT_SIZE
    kernel: KernelSpec = field(default_factory=KernelSpec.default_grid)

    def validate(self) -> None:
        if self.method not in METHODS:
            raise InputError(f"unknown method {self.method!r}; choose from {METHODS}")
        if not (1 <= self.k <= self.emb.n):
            raise InputError(f"budget must satisfy 1 <= k <= n: k={self.k}, n={self.emb.n}")
        if not (self.lam > 0.0):
            raise InputError(f"lambda must be positive, got {self.lam}")
        if self.m < 1:
            raise InputError(f"segment size must be >= 1, got {self.m}")


def uniform_indices(n: int, k: int) -> list[int]:
    """k evenly spaced indices over [0, n-1], rounding half up; k=1 picks the
    middle frame.  Rounding collisions (impossible for k <= n) shift forward."""
    if k == 1:
        return [(n - 1) // 2]
    raw = [int(np.floor(i * (n - 1) / (k - 1) + 0.5)) for i in range(k)]
    out: list[int] = []
    for v in raw:
        if out and v <= out[-1]:
            v = out[-1] + 1
        out.append(v)
    if out[-1] >= n:
        raise RuntimeError("internal error: uniform spacing overflow")
    return out


def topk_indices(relevance: np.ndarray, k: int) -> list[int]:
    """Indices of the k largest relevances, ties to the lower index, sorted."""
    order = np.argsort(-relevance, kind="stable")
    return sorted(int(i) for i in order[:k])


def select(req: SelectionRequest, *, parallel: bool = False) -> SelectionResult:
    """Dispatch a selection request; every method returns exactly k sorted
    unique indices."""
    req.validate()
    n = req.emb.n
    t0 = time.perf_counter()

    if req.method == "uniform":
        indices = uniform_indices(n, req.k)
        total = (time.perf_counter() - t0) * 1000.0
        return SelectionResult(indices=indices, allocation=[], score=0.0,
                               timing={"kernel_ms": 0.0, "select_ms": total, "total_ms": total})

    if req.method == "topk":
        r = build_relevance(req.emb, req.kernel)
        t1 = time.perf_counter()
        indices = topk_indices(r, req.k)
        t2 = time.perf_counter()
        return SelectionResult(
            indices=indices, allocation=[], score=float(np.sum(r[indices])),
            timing={"kernel_ms": (t1 - t0) * 1e3, "select_ms": (t2 - t1) * 1e3,
                    "total_ms": (t2 - t0) * 1e3},
        )

    if req.method == "mdp3-mgk":
        ck = ConditionedKernel.from_embeddings(req.emb, req.kernel, req.lam,
                                               relevance=np.ones(n))
    elif req.method == "mdp3-cosine":
        ck = ConditionedKernel.cosine_from_embeddings(req.emb, req.lam)
    else:
        ck = ConditionedKernel.from_embeddings(req.emb, req.kernel, req.lam)
    t1 = time.perf_counter()

    if req.method == "dpp":
        picks, gains = greedy_map(ck, req.k)
        t2 = time.perf_counter()
        return SelectionResult(
            indices=sorted(picks), allocation=[], score=float(np.sum(gains)),
            timing={"kernel_ms": (t1 - t0) * 1e3, "select_ms": (t2 - t1) * 1e3,
                    "total_ms": (t2 - t0) * 1e3},
        )

    plan = make_segments(n, req.m)
    result = allocate_and_select(ck, plan, req.k, parallel=parallel)
    t2 = time.perf_counter()
    return SelectionResult(
        indices=result.indices, allocation=result.allocation, score=result.score,
        timing={"kernel_ms": (t1 - t0) * 1e3, "select_ms": (t2 - t1) * 1e3,
                "total_ms": (t2 - t0) * 1e3},
    )
