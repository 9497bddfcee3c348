"""Slow, obviously-correct reference implementations for tests and audits.

Determinants here go through dense LU factorizations (``slogdet``), a
different path from the engine's incremental Cholesky, so agreement between
the two is evidence rather than circularity.  Enumeration sizes are capped to
keep runtimes in seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .allocate import SegmentPlan
from .errors import InputError
from .greedy import conditional_offset, run_greedy


@dataclass(frozen=True)
class OracleBudgetLimits:
    max_n: int = 14
    max_k: int = 6
    max_T: int = 4


DEFAULT_LIMITS = OracleBudgetLimits()


def _subset_logdet(m: np.ndarray, subset: tuple[int, ...]) -> float:
    if not subset:
        return 0.0
    sign, val = np.linalg.slogdet(m[np.ix_(subset, subset)])
    return val if sign > 0 else -math.inf


def brute_map(Ltilde, k: int, candidates=None,
              limits: OracleBudgetLimits = DEFAULT_LIMITS) -> tuple[tuple[int, ...], float]:
    """Exhaustive size-k max-log-det subset; ties go to the lexicographically
    smallest subset."""
    m = np.asarray(Ltilde, dtype=np.float64)
    cand = tuple(range(m.shape[0])) if candidates is None else tuple(sorted(candidates))
    if len(cand) > limits.max_n or k > limits.max_k or math.comb(len(cand), k) > 10**6:
        raise InputError(
            f"oracle size limit exceeded: n={len(cand)}, k={k}"
        )
    best_subset: tuple[int, ...] | None = None
    best_val = -math.inf
    for subset in combinations(cand, k):
        val = _subset_logdet(m, subset)
        if val > best_val:
            best_val = val
            best_subset = subset
    return best_subset, best_val


def brute_allocation(ck, plan: SegmentPlan, k: int, *, condition_size: int = 1,
                     limits: OracleBudgetLimits = DEFAULT_LIMITS):
    """Enumerate every per-segment budget split and take the best under the
    same stage rewards the dynamic program prices; returns (allocation, trace,
    score).

    Stage rewards condition on the best-known prefix for each (segment, spent
    budget) pair, where "best" is re-derived here by scanning *all* prefix
    compositions rather than by the DP recursion.  Agreement with the table
    therefore checks the DP's bounds, relaxation, and tie-breaking over the
    full composition space.  (How far this shared lazy reward strays from full
    conditioning is measured separately by full_condition_sequential.)
    """
    if plan.T > limits.max_T or k > limits.max_k:
        raise InputError(f"oracle size limit exceeded: T={plan.T}, k={k}")
    if k > plan.n:
        raise InputError(f"budget exceeds frames: k={k}, n={plan.n}")
    if k == 0:
        empty = tuple(() for _ in range(plan.T))
        return (0,) * plan.T, empty, 0.0

    caps = [len(rng) for rng in plan.ranges]
    # per composition: (score, trace, recent picks); ties between equal-scoring
    # compositions prefer the reverse-lexicographically largest split, matching
    # the table's preference for the smaller previous spent budget.
    state: dict[tuple[int, ...], tuple[float, tuple[tuple[int, ...], ...], tuple[int, ...]]]
    state = {(): (0.0, (), ())}
    for t, rng in enumerate(plan.ranges, start=1):
        offset = conditional_offset(ck, (), list(rng))
        # best prefix per spent budget, from the exhaustive prefix scan
        best_prefix: dict[int, tuple[int, ...]] = {}
        for comp, (score, _, _) in state.items():
            c = sum(comp)
            cur = best_prefix.get(c)
            if cur is None or (score, tuple(reversed(comp))) > (state[cur][0], tuple(reversed(cur))):
                best_prefix[c] = comp
        # price stage t once per spent budget, conditioned on the best prefix
        priced: dict[int, tuple[list[int], np.ndarray]] = {}
        for c, comp in best_prefix.items():
            recent = state[comp][2]
            kt_max = min(caps[t - 1], k - c)
            if kt_max == 0:
                priced[c] = ([], np.asarray([offset]))
                continue
            _, picks, gains = run_greedy(ck, recent, list(rng), kt_max)
            rewards = np.empty(kt_max + 1)
            rewards[0] = 0.0
            np.cumsum(gains, out=rewards[1:])
            rewards += offset
            priced[c] = (picks, rewards)
        new_state = {}
        for comp, (score, trace, recent) in state.items():
            c = sum(comp)
            picks, rewards = priced[c]
            for kt in range(rewards.shape[0]):
                chosen = tuple(picks[:kt])
                kept = recent + chosen
                new_state[comp + (kt,)] = (
                    score + float(rewards[kt]),
                    trace + (chosen,),
                    kept[len(kept) - condition_size:] if condition_size else (),
                )
        state = new_state

    complete = [(comp, val) for comp, val in state.items() if sum(comp) == k]
    comp, (score, trace, _) = max(
        complete, key=lambda item: (item[1][0], tuple(reversed(item[0])))
    )
    return comp, trace, score


def full_condition_sequential(ck, plan: SegmentPlan, sizes) -> tuple[tuple[int, ...], ...]:
    """Sequential per-segment MAP conditioning on the *entire* previous
    segment's selection (not just the most recent frame), for measuring how
    far the lazy single-frame condition strays."""
    sizes = [int(s) for s in sizes]
    if len(sizes) != plan.T:
        raise InputError(f"infeasible sizes: expected {plan.T} entries, got {len(sizes)}")
    for s, rng in zip(sizes, plan.ranges):
        if s < 0 or s > len(rng):
            raise InputError(f"infeasible sizes: {s} frames from a {len(rng)}-frame segment")
    trace: list[tuple[int, ...]] = []
    prev: tuple[int, ...] = ()
    for s, rng in zip(sizes, plan.ranges):
        if s == 0:
            trace.append(())
            prev = ()
            continue
        _, picks, _ = run_greedy(ck, prev, list(rng), s)
        trace.append(tuple(picks))
        prev = tuple(picks)
    return tuple(trace)
