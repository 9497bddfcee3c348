"""Greedy MAP inference for (conditional) DPPs with incremental Cholesky updates.

Each step appends the candidate maximizing the marginal log-determinant gain
log det(L_{S + i}) - log det(L_S), which equals log(d_i^2) for the candidate's
next Cholesky pivot d_i.  Pivots are maintained incrementally, so one step
costs O(|candidates| * |selected|) instead of a fresh factorization.

Kernel inputs may be dense ndarrays or any object exposing
``diag(idx)``, ``row(i, idx)`` and ``block(idx)`` (see ConditionedKernel);
the latter avoids materializing large matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError

# Pivots at or below this floor mean the candidate is linearly dependent on
# the current selection; the pivot is clamped so the factorization continues
# and the corresponding gain bottoms out at log(JITTER).
JITTER = 1e-12


class _DenseSource:
    """Adapter giving a plain symmetric ndarray the kernel-source interface."""

    def __init__(self, m: np.ndarray):
        m = np.asarray(m, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InputError(f"kernel matrix must be square, got shape {m.shape}")
        self._m = m
        self.n = m.shape[0]

    def diag(self, idx):
        return self._m[idx, idx]

    def row(self, i, idx):
        return self._m[i, idx]

    def block(self, idx):
        return self._m[np.ix_(idx, idx)]


def _as_source(kernel):
    if hasattr(kernel, "row") and hasattr(kernel, "diag") and hasattr(kernel, "block"):
        return kernel
    return _DenseSource(kernel)


@dataclass
class GreedyState:
    """Final factorization state of one greedy run.

    selected: factored indices in order (condition prefix first, then picks)
    chol: lower-triangular factor of the kernel restricted to `selected`
    gains: current marginal-gain values d_i^2 per candidate (-inf once taken)
    logdet: log det over `selected`, i.e. 2 * sum(log(diag(chol)))
    """

    selected: list[int]
    chol: np.ndarray
    gains: np.ndarray
    logdet: float


def run_greedy(kernel, condition, candidates, k: int) -> tuple[GreedyState, list[int], np.ndarray]:
    """Factor `condition` (forced picks, in order), then greedily append k
    candidates.

    Returns (state, picks, step_gains) where picks are the k chosen candidate
    indices in selection order and step_gains[j] is the log-det increment of
    the (j+1)-th pick.  Ties break toward the earliest candidate in the given
    order (callers pass candidates sorted ascending).
    """
    source = _as_source(kernel)
    cond = list(condition)
    cand = list(candidates)
    p, q = len(cond), len(cand)
    if k > q:
        raise InputError(f"budget exceeds candidates: k={k}, candidates={q}")
    if k < 0:
        raise InputError(f"budget must be nonnegative, got {k}")

    work = np.asarray(cond + cand, dtype=np.intp)
    total = p + k
    di2s = np.array(source.diag(work), dtype=np.float64, copy=True)
    cis = np.empty((total, p + q), dtype=np.float64)
    order: list[int] = []
    pivots = np.empty(total, dtype=np.float64)
    step_gains = np.empty(k, dtype=np.float64)

    for step in range(total):
        if step < p:
            j = step
        else:
            j = p + int(np.argmax(di2s[p:]))
        dj2 = max(di2s[j], JITTER)
        if step >= p:
            step_gains[step - p] = math.log(dj2)
        dj = math.sqrt(dj2)
        pivots[step] = dj
        row = source.row(int(work[j]), work).astype(np.float64, copy=False)
        if step == 0:
            eis = row / dj
        else:
            eis = (row - cis[:step, j] @ cis[:step, :]) / dj
        cis[step, :] = eis
        di2s -= eis * eis
        di2s[j] = -np.inf
        order.append(j)

    chol = np.zeros((total, total), dtype=np.float64)
    for a, pos in enumerate(order):
        chol[a, :a] = cis[:a, pos]
        chol[a, a] = pivots[a]

    state = GreedyState(
        selected=[int(work[j]) for j in order],
        chol=chol,
        gains=di2s[p:].copy(),
        logdet=float(2.0 * np.sum(np.log(pivots))) if total else 0.0,
    )
    picks = state.selected[p:]
    return state, picks, step_gains


def greedy_map(Ltilde, k: int, candidates=None) -> tuple[list[int], list[float]]:
    """Greedy MAP subset of size k; returns (indices in selection order,
    per-step log-det gains)."""
    source = _as_source(Ltilde)
    if candidates is None:
        cand = list(range(source.n))
    else:
        cand = sorted(int(i) for i in candidates)
    _, picks, gains = run_greedy(source, (), cand, k)
    return picks, [float(g) for g in gains]


@dataclass(frozen=True)
class ConditionalContext:
    """Fixed prior picks, the candidate index range, and the log-normalizer
    offset -log det(L_t + I_t) carried into each segment's rewards."""

    condition: tuple[int, ...]
    candidates: tuple[int, ...]
    offset: float

    def __post_init__(self):
        if set(self.condition) & set(self.candidates):
            raise InputError("condition and candidates overlap")
        if not np.isfinite(self.offset):
            raise InputError(f"offset must be finite, got {self.offset}")


def conditional_offset(kernel, condition, candidates) -> float:
    """-log det of the conditioned kernel over condition + candidates with ones
    added on the candidate diagonal (zeros on the condition)."""
    source = _as_source(kernel)
    cond = list(condition)
    cand = list(candidates)
    idx = np.asarray(cond + cand, dtype=np.intp)
    m = np.array(source.block(idx), dtype=np.float64, copy=True)
    pos = np.arange(len(cond), len(idx))
    m[pos, pos] += 1.0
    return -logdet_psd(m)


def conditional_greedy_map(Ltilde, ctx: ConditionalContext, kt: int) -> tuple[list[int], np.ndarray]:
    """Greedy MAP over ctx.candidates given ctx.condition already selected.

    Returns (picks, rewards) with rewards[j] the cumulative conditional
    log-probability of keeping the first j picks:
        rewards[j] = log det(L_{cond + S_j}) - log det(L_cond) + ctx.offset.
    Greedy prefixes are nested, so one run yields the whole trace 0..kt.
    """
    cand = sorted(int(i) for i in ctx.candidates)
    if kt == 0:
        return [], np.asarray([ctx.offset], dtype=np.float64)
    _, picks, gains = run_greedy(Ltilde, ctx.condition, cand, kt)
    rewards = np.empty(kt + 1, dtype=np.float64)
    rewards[0] = ctx.offset
    np.cumsum(gains, out=rewards[1:])
    rewards[1:] += ctx.offset
    return picks, rewards


def _clamped_cholesky(a: np.ndarray) -> tuple[np.ndarray, bool]:
    """Lower-triangular factor with pivots clamped at the jitter floor."""
    n = a.shape[0]
    low = np.zeros_like(a)
    clamped = False
    for i in range(n):
        d2 = a[i, i] - np.dot(low[i, :i], low[i, :i])
        if d2 <= JITTER:
            d2 = JITTER
            clamped = True
        low[i, i] = math.sqrt(d2)
        if i + 1 < n:
            low[i + 1:, i] = (a[i + 1:, i] - low[i + 1:, :i] @ low[i, :i]) / low[i, i]
    return low, clamped


def logdet_psd(M, *, return_clamped: bool = False):
    """log det of a symmetric PSD matrix via Cholesky.

    Singular directions are clamped at the jitter floor instead of failing;
    pass return_clamped=True to also receive whether clamping occurred.
    """
    m = np.asarray(M, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"matrix must be square, got shape {m.shape}")
    if m.size == 0:
        return (0.0, False) if return_clamped else 0.0
    if np.max(np.abs(m - m.T)) > 1e-8:
        raise InputError("matrix is not symmetric")
    a = 0.5 * (m + m.T)
    clamped = False
    try:
        low = np.linalg.cholesky(a)
        if np.min(np.diag(low)) ** 2 <= JITTER:
            low, clamped = _clamped_cholesky(a)
    except np.linalg.LinAlgError:
        low, clamped = _clamped_cholesky(a)
    value = float(2.0 * np.sum(np.log(np.diag(low))))
    if return_clamped:
        return value, clamped
    return value
