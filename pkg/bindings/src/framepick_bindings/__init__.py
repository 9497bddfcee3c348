"""In-process bindings for the framepick selection engine.

ML pipelines hand over numeric arrays directly instead of writing embedding
files; results are numerically identical to the CLI path because both routes
share the same float64 engine.  Float32 inputs are upcast; float64
C-contiguous arrays are ingested without copying, anything else costs one
copy.  No reference to the caller's arrays is retained after the call.

The surface is one function, ``select_frames``, plus the ``ENGINE_VERSION``
constant.  Failures raise the engine's native exceptions, which carry the CLI
exit code in their ``code`` attribute.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from framepick import __version__ as ENGINE_VERSION
from framepick import (
    DEFAULT_LAMBDA,
    DEFAULT_SEGMENT_SIZE,
    EmbeddingSet,
    InputError,
    KernelSpec,
    SelectionRequest,
    pool_query_chunks,
    select,
)

__all__ = ["BindingRequest", "ENGINE_VERSION", "select_frames"]

__version__ = ENGINE_VERSION


@dataclass
class BindingRequest:
    """Arrays plus the scalar selection knobs.

    frames: n x d array.  query: either a d-vector or a c x d chunk array;
    multi-row chunk arrays are mean-pooled and unit-normalized, and a
    single-row array is treated as that row (matching the file-based path).
    """

    frames: np.ndarray
    query: np.ndarray
    k: int
    method: str = "mdp3"
    lam: float = DEFAULT_LAMBDA
    m: int = DEFAULT_SEGMENT_SIZE
    kernel_alphas: tuple[float, ...] | None = None
    normalize: bool = True
    parallel: bool = False


def _pooled_query(query) -> np.ndarray:
    q = np.asarray(query, dtype=np.float64)
    if q.ndim == 1:
        return q
    if q.ndim == 2:
        if q.shape[0] == 1:
            return q[0]
        return pool_query_chunks(q)
    raise InputError(f"query must be 1-D or 2-D, got shape {q.shape}")


def select_frames(req: BindingRequest) -> tuple[list[int], list[int], float]:
    """Run one selection over caller-provided arrays.

    Returns (indices, per-segment allocation, score); indices are sorted and
    the allocation list is empty for unsegmented methods.
    """
    frames = np.asarray(req.frames, dtype=np.float64)
    if frames.ndim != 2:
        raise InputError(f"frames must be 2-D, got shape {frames.shape}")
    emb = EmbeddingSet.from_arrays(frames, _pooled_query(req.query),
                                   normalize=req.normalize)
    kernel = (KernelSpec.from_alphas(req.kernel_alphas)
              if req.kernel_alphas is not None else KernelSpec.default_grid())
    result = select(
        SelectionRequest(emb=emb, k=req.k, method=req.method, lam=req.lam,
                         m=req.m, kernel=kernel),
        parallel=req.parallel,
    )
    return list(result.indices), list(result.allocation), float(result.score)
