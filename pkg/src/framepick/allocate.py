"""Budget allocation across temporal segments via dynamic programming.

The frame range is cut into contiguous segments of size m.  Stage rewards are
conditional greedy DPP runs: taking k_t frames from segment t, conditioned on
the most recently selected frame, is worth

    log det(L_{cond + S_t}) - log det(L_cond) + offset_t,

with offset_t = -log det(L_{N_t} + I) computed once per segment so every
allocation path is shifted equally.  The table keeps only the best
accumulated reward Q* per (segment, spent-budget) cell; greedy prefixes are
nested, so one greedy run per source cell prices every k_t at once.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .greedy import conditional_offset, logdet_psd, run_greedy


@dataclass(frozen=True)
class SegmentPlan:
    """Contiguous partition of [0, n) into T = ceil(n/m) ranges."""

    m: int
    T: int
    ranges: tuple[range, ...]

    @property
    def n(self) -> int:
        return self.ranges[-1].stop if self.ranges else 0


def make_segments(n: int, m: int) -> SegmentPlan:
    """Split [0, n) into ceil(n/m) half-open ranges; only the last may be short."""
    if n < 1:
        raise InputError(f"frame count must be >= 1, got {n}")
    if m < 1:
        raise InputError(f"segment size must be >= 1, got {m}")
    ranges = tuple(range(i, min(i + m, n)) for i in range(0, n, m))
    return SegmentPlan(m=m, T=len(ranges), ranges=ranges)


@dataclass
class DPTable:
    """Q* value grid over (segment, spent budget) plus selection traces.

    qstar[t][C] is the best accumulated reward of selecting C frames within
    the first t segments (-inf when unreachable); trace cells are tuples of
    per-segment index tuples.  Traces are stored as back-pointers and
    materialized on demand.
    """

    qstar: np.ndarray
    k: int
    # per cell: (previous C, picks made in this segment) or None
    _prev: list[list[tuple[int, tuple[int, ...]] | None]]
    _trace_grid: list[list[tuple[tuple[int, ...], ...] | None]] | None = field(
        default=None, repr=False
    )

    @property
    def T(self) -> int:
        return self.qstar.shape[0] - 1

    def trace_at(self, t: int, c: int) -> tuple[tuple[int, ...], ...] | None:
        """Reconstruct the selection trace for cell (t, c)."""
        if not np.isfinite(self.qstar[t, c]):
            return None
        parts: list[tuple[int, ...]] = []
        while t > 0:
            prev_c, picks = self._prev[t][c]
            parts.append(picks)
            t, c = t - 1, prev_c
        parts.reverse()
        return tuple(parts)

    @property
    def trace(self) -> list[list[tuple[tuple[int, ...], ...] | None]]:
        if self._trace_grid is None:
            self._trace_grid = [
                [self.trace_at(t, c) for c in range(self.k + 1)]
                for t in range(self.T + 1)
            ]
        return self._trace_grid


@dataclass(frozen=True)
class SelectionResult:
    """Final selection: sorted frame indices, per-segment allocation counts
    (empty for unsegmented methods), the objective value, and per-phase
    timings in milliseconds."""

    indices: list[int]
    allocation: list[int]
    score: float
    timing: dict[str, float]


def _condition_of(last_picks: tuple[int, ...]) -> tuple[int, ...]:
    return last_picks


def run_allocation(ck, plan: SegmentPlan, k: int, *, parallel: bool = False,
                   condition_size: int = 1) -> DPTable:
    """Fill the Q*/trace table stage by stage.

    Within a stage, source cells are independent and may be evaluated
    concurrently; relaxations merge in ascending source order, replacing a
    target only on strict improvement, so parallel and serial fills produce
    identical tables.
    """
    if condition_size < 0:
        raise InputError(f"condition size must be >= 0, got {condition_size}")
    kk = k + 1
    qstar = np.full((plan.T + 1, kk), -np.inf)
    qstar[0, 0] = 0.0
    prev: list[list[tuple[int, tuple[int, ...]] | None]] = [
        [None] * kk for _ in range(plan.T + 1)
    ]
    # most recent `condition_size` picks along each cell's trace, in pick order
    last: list[tuple[int, ...] | None] = [None] * kk
    last[0] = ()

    pool = ThreadPoolExecutor() if parallel else None
    try:
        for t in range(1, plan.T + 1):
            cand = list(plan.ranges[t - 1])
            offset = conditional_offset(ck, (), cand)
            sources = [c for c in range(kk) if np.isfinite(qstar[t - 1, c])]

            def stage_reward(c: int):
                cond = _condition_of(last[c])
                kt_max = min(len(cand), k - c)
                if kt_max == 0:
                    picks: list[int] = []
                    rewards = np.asarray([offset])
                else:
                    _, picks, gains = run_greedy(ck, cond, cand, kt_max)
                    rewards = np.empty(kt_max + 1)
                    rewards[0] = 0.0
                    np.cumsum(gains, out=rewards[1:])
                    rewards += offset
                return picks, rewards

            if pool is not None and len(sources) > 1:
                computed = list(pool.map(stage_reward, sources))
            else:
                computed = [stage_reward(c) for c in sources]

            new_last: list[tuple[int, ...] | None] = [None] * kk
            for c, (picks, rewards) in zip(sources, computed):
                base = qstar[t - 1, c]
                for kt in range(rewards.shape[0]):
                    ct = c + kt
                    val = base + rewards[kt]
                    if val > qstar[t, ct]:
                        qstar[t, ct] = val
                        prev[t][ct] = (c, tuple(picks[:kt]))
                        kept = last[c] + tuple(picks[:kt])
                        new_last[ct] = kept[len(kept) - condition_size:] if condition_size else ()
            last = new_last
    finally:
        if pool is not None:
            pool.shutdown()

    return DPTable(qstar=qstar, k=k, _prev=prev)


def allocate_and_select(ck, plan: SegmentPlan, k: int, *, parallel: bool = False,
                        condition_size: int = 1) -> SelectionResult:
    """Allocate budget k across the plan's segments and return the selection."""
    n = plan.n
    if k < 0:
        raise InputError(f"budget must be nonnegative, got {k}")
    if k > n:
        raise InputError(f"budget exceeds frames: k={k}, n={n}")
    start = time.perf_counter()
    if k == 0:
        return SelectionResult(indices=[], allocation=[0] * plan.T, score=0.0,
                               timing={"select_ms": 0.0})
    table = run_allocation(ck, plan, k, parallel=parallel, condition_size=condition_size)
    trace = table.trace_at(plan.T, k)
    if trace is None:
        raise RuntimeError("internal error: final DP cell unreachable")
    indices = sorted(i for seg in trace for i in seg)
    if len(indices) != k:
        raise RuntimeError("internal error: DP trace size mismatch")
    elapsed = (time.perf_counter() - start) * 1000.0
    return SelectionResult(
        indices=indices,
        allocation=[len(seg) for seg in trace],
        score=float(table.qstar[plan.T, k]),
        timing={"select_ms": elapsed},
    )


def sequential_map_fixed_sizes(ck, plan: SegmentPlan, sizes, *,
                               condition_size: int = 1) -> tuple[tuple[int, ...], ...]:
    """Online pass with a fixed per-segment budget: select sizes[t] frames from
    each segment in order, conditioning on the most recent picks.  No DP."""
    sizes = [int(s) for s in sizes]
    if len(sizes) != plan.T:
        raise InputError(f"infeasible sizes: expected {plan.T} entries, got {len(sizes)}")
    for s, rng in zip(sizes, plan.ranges):
        if s < 0 or s > len(rng):
            raise InputError(f"infeasible sizes: {s} frames from a {len(rng)}-frame segment")
    trace: list[tuple[int, ...]] = []
    recent: tuple[int, ...] = ()
    for s, rng in zip(sizes, plan.ranges):
        if s == 0:
            trace.append(())
            continue
        _, picks, _ = run_greedy(ck, recent, list(rng), s)
        trace.append(tuple(picks))
        kept = recent + tuple(picks)
        recent = kept[len(kept) - condition_size:] if condition_size else ()
    return tuple(trace)


def score_of(trace, ck, plan: SegmentPlan, *, condition_size: int = 1) -> float:
    """Recompute a trace's accumulated reward from dense log-dets (table audit).

    Applies the same per-segment offsets and recent-picks conditioning as the
    dynamic program, but through direct block factorizations rather than the
    incremental greedy path.
    """
    trace = tuple(tuple(int(i) for i in seg) for seg in trace)
    if len(trace) > plan.T:
        raise InputError(f"inconsistent trace: {len(trace)} segments for a {plan.T}-segment plan")
    total = 0.0
    recent: tuple[int, ...] = ()
    for seg, rng in zip(trace, plan.ranges):
        if any(i not in rng for i in seg):
            raise InputError(f"inconsistent trace: indices {seg} outside segment {rng}")
        if len(set(seg)) != len(seg):
            raise InputError(f"inconsistent trace: duplicate indices in {seg}")
        offset = conditional_offset(ck, (), list(rng))
        cond = list(recent)
        joint = logdet_psd(ck.block(np.asarray(cond + list(seg), dtype=np.intp)))
        base = logdet_psd(ck.block(np.asarray(cond, dtype=np.intp))) if cond else 0.0
        total += joint - base + offset
        kept = recent + tuple(seg)
        recent = kept[len(kept) - condition_size:] if condition_size else ()
    return total
