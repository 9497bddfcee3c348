"""Synthetic planted-relevance instances and the comparison/timing harness.

A planted instance hides a cluster of query-like frames inside one segment of
an otherwise random embedding stream, so selectors can be scored without any
downstream model: planted-frame recall measures query relevance, and the mean
pairwise similarity of the selected frames measures redundancy.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .kernels import EmbeddingSet, KernelSpec, build_similarity
from .selectors import SelectionRequest, select

DEFAULT_METHODS = ("mdp3", "dpp", "topk", "uniform")


@dataclass(frozen=True)
class GeneratorSpec:
    """Planted-relevance generator parameters."""

    n: int = 256
    d: int = 32
    planted: int = 12
    segment: int = 0
    noise: float = 0.1
    seed: int = 0
    trials: int = 1

    def validate(self, m: int) -> None:
        if self.n < 1 or self.d < 1:
            raise InputError(f"invalid generator spec: n={self.n}, d={self.d}")
        if self.planted < 1 or self.planted > self.n:
            raise InputError(f"invalid generator spec: planted={self.planted}")
        if self.noise < 0:
            raise InputError(f"invalid generator spec: noise={self.noise}")
        if self.trials < 1:
            raise InputError(f"invalid generator spec: trials={self.trials}")
        n_segments = (self.n + m - 1) // m
        if not (0 <= self.segment < n_segments):
            raise InputError(
                f"invalid generator spec: segment={self.segment} with {n_segments} segments"
            )
        seg_start = self.segment * m
        seg_len = min(m, self.n - seg_start)
        if self.planted > seg_len:
            raise InputError(
                f"invalid generator spec: {self.planted} planted frames exceed "
                f"segment capacity {seg_len}"
            )


_GEN_FIELDS = {"n": int, "d": int, "planted": int, "segment": int,
               "noise": float, "seed": int, "trials": int}


def parse_generator_spec(text: str) -> GeneratorSpec:
    """Parse 'n=256,d=32,planted=12,seed=7' style generator descriptions."""
    kwargs = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise InputError(f"invalid generator spec entry {part!r}")
        key, _, value = part.partition("=")
        key = key.strip()
        if key not in _GEN_FIELDS:
            raise InputError(f"unknown generator spec key {key!r}")
        try:
            kwargs[key] = _GEN_FIELDS[key](value)
        except ValueError:
            raise InputError(f"invalid generator spec value {part!r}") from None
    return GeneratorSpec(**kwargs)


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def planted_instance(gen: GeneratorSpec, m: int, trial: int = 0):
    """Build one instance; returns (frames, query, planted index array)."""
    gen.validate(m)
    rng = np.random.default_rng(gen.seed + trial)
    query = _unit(rng.standard_normal(gen.d))
    frames = rng.standard_normal((gen.n, gen.d))
    frames /= np.linalg.norm(frames, axis=1, keepdims=True)
    seg_start = gen.segment * m
    seg_len = min(m, gen.n - seg_start)
    planted_idx = np.sort(rng.choice(seg_len, size=gen.planted, replace=False)) + seg_start
    noisy = query[None, :] + gen.noise * rng.standard_normal((gen.planted, gen.d))
    frames[planted_idx] = noisy / np.linalg.norm(noisy, axis=1, keepdims=True)
    return frames, query, planted_idx


def _redundancy(emb: EmbeddingSet, kernel: KernelSpec, indices: list[int]) -> float:
    """Mean pairwise base similarity of the selected frames."""
    if len(indices) < 2:
        return 0.0
    sub = EmbeddingSet(frames=emb.frames[indices], query=emb.query,
                       normalized=emb.normalized)
    sim = build_similarity(sub, kernel)
    iu = np.triu_indices(len(indices), k=1)
    return float(np.mean(sim[iu]))


def run_bench(gen: GeneratorSpec, methods=DEFAULT_METHODS, *, k: int = 8,
              lam: float = 0.2, m: int = 32, kernel: KernelSpec | None = None,
              parallel: bool = False, timing_grid=None, timing_repeats: int = 1) -> dict:
    """Score each method on `trials` planted instances, optionally timing the
    DP selector across a frame-count grid; returns the report document."""
    kernel = kernel or KernelSpec.default_grid()
    gen.validate(m)
    per_method: dict[str, dict[str, list[float]]] = {
        meth: {"recall": [], "redundancy": [], "time_ms": []} for meth in methods
    }
    for trial in range(gen.trials):
        frames, query, planted_idx = planted_instance(gen, m, trial)
        emb = EmbeddingSet.from_arrays(frames, query, normalize=True)
        planted = set(int(i) for i in planted_idx)
        denom = min(k, len(planted))
        for meth in methods:
            req = SelectionRequest(emb=emb, k=k, method=meth, lam=lam, m=m, kernel=kernel)
            t0 = time.perf_counter()
            res = select(req, parallel=parallel)
            elapsed = (time.perf_counter() - t0) * 1000.0
            hit = len(planted.intersection(res.indices))
            per_method[meth]["recall"].append(hit / denom)
            per_method[meth]["redundancy"].append(_redundancy(emb, kernel, res.indices))
            per_method[meth]["time_ms"].append(elapsed)

    report = {
        "generator": {"n": gen.n, "d": gen.d, "planted": gen.planted,
                      "segment": gen.segment, "noise": gen.noise,
                      "seed": gen.seed, "trials": gen.trials},
        "config": {"k": k, "lambda": lam, "m": m,
                   "kernel_alphas": list(kernel.alphas), "parallel": parallel},
        "methods": {
            meth: {
                "recall_mean": float(np.mean(vals["recall"])),
                "redundancy_mean": float(np.mean(vals["redundancy"])),
                "time_ms_mean": float(np.mean(vals["time_ms"])),
            }
            for meth, vals in per_method.items()
        },
    }
    if timing_grid:
        report["timing"] = timing_report(timing_grid, d=gen.d, k=k, lam=lam, m=m,
                                         seed=gen.seed, repeats=timing_repeats,
                                         parallel=parallel)
    return report


def loglog_slope(ns, times) -> float:
    """Least-squares slope of log(time) against log(n)."""
    return float(np.polyfit(np.log(np.asarray(ns, float)),
                            np.log(np.asarray(times, float)), 1)[0])


def timing_report(ns, *, d: int = 64, k: int = 8, lam: float = 0.2, m: int = 32,
                  seed: int = 0, repeats: int = 1, parallel: bool = False) -> dict:
    """Wall-time the DP selector on random instances across a frame-count grid."""
    ns = sorted(int(n) for n in ns)
    if any(n < max(k, 1) for n in ns):
        raise InputError("timing grid sizes must be >= k")
    kernel = KernelSpec.default_grid()
    times = []
    for n in ns:
        rng = np.random.default_rng(seed)
        frames = rng.standard_normal((n, d))
        query = rng.standard_normal(d)
        emb = EmbeddingSet.from_arrays(frames, query, normalize=True)
        req = SelectionRequest(emb=emb, k=k, lam=lam, m=m, kernel=kernel)
        best = np.inf
        for _ in range(max(1, repeats)):
            t0 = time.perf_counter()
            select(req, parallel=parallel)
            best = min(best, time.perf_counter() - t0)
        times.append(best * 1000.0)
    return {"n": ns, "time_ms": times, "loglog_slope": loglog_slope(ns, times)}


def render_report(report: dict) -> str:
    """Plain-text table view of a bench report."""
    gen = report["generator"]
    cfg = report["config"]
    lines = [
        "planted-relevance bench",
        f"  generator: n={gen['n']} d={gen['d']} planted={gen['planted']} "
        f"segment={gen['segment']} noise={gen['noise']} seed={gen['seed']} "
        f"trials={gen['trials']}",
        f"  config:    k={cfg['k']} lambda={cfg['lambda']} m={cfg['m']}",
        "",
        f"  {'method':<12} {'recall':>8} {'redundancy':>11} {'time_ms':>10}",
    ]
    for meth, vals in report["methods"].items():
        lines.append(
            f"  {meth:<12} {vals['recall_mean']:>8.3f} "
            f"{vals['redundancy_mean']:>11.3f} {vals['time_ms_mean']:>10.2f}"
        )
    if "timing" in report:
        t = report["timing"]
        lines.append("")
        lines.append(f"  {'n':>8} {'time_ms':>12}")
        for n, ms in zip(t["n"], t["time_ms"]):
            lines.append(f"  {n:>8} {ms:>12.2f}")
        lines.append(f"  log-log slope: {t['loglog_slope']:.3f}")
    return "\n".join(lines)
