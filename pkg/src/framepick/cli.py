"""Command-line interface.

``select`` runs one selection over embedding files and writes a result
document; ``bench`` runs the synthetic comparison/timing harness.  Exit codes:
0 success, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass

from . import __version__
from .bench import parse_generator_spec, render_report, run_bench
from .errors import InputError, NumericalError, SelectionError
from .fileio import (RESULT_SCHEMA, read_embeddings, write_json_document)
from .kernels import DEFAULT_LAMBDA, EmbeddingSet, KernelSpec, pool_query_chunks
from .selectors import DEFAULT_SEGMENT_SIZE, SelectionRequest, select


@dataclass
class RunConfig:
    """Scalar knobs shared by the CLI, file runner, and in-process callers."""

    method: str = "mdp3"
    k: int = 8
    lam: float = DEFAULT_LAMBDA
    m: int = DEFAULT_SEGMENT_SIZE
    kernel_alphas: tuple[float, ...] | None = None
    normalize: bool = True
    parallel: bool = False
    seed: int = 0

    def kernel_spec(self) -> KernelSpec:
        if self.kernel_alphas is None:
            return KernelSpec.default_grid()
        return KernelSpec.from_alphas(self.kernel_alphas)


def _error_document(exc: SelectionError) -> dict:
    return {
        "schema": RESULT_SCHEMA,
        "engine_version": __version__,
        "error": {"code": exc.code, "message": str(exc)},
    }


def run_select(config: RunConfig, frames_path, query_path, out_path) -> int:
    """Load embeddings, run the configured selection, write the result document."""
    try:
        t0 = time.perf_counter()
        frames = read_embeddings(frames_path)
        query_rows = read_embeddings(query_path)
        if query_rows.shape[1] != frames.shape[1]:
            raise InputError(
                f"dimension mismatch: frames d={frames.shape[1]}, "
                f"query d={query_rows.shape[1]}"
            )
        query = pool_query_chunks(query_rows) if query_rows.shape[0] > 1 else query_rows[0]
        load_ms = (time.perf_counter() - t0) * 1000.0

        emb = EmbeddingSet.from_arrays(frames, query, normalize=config.normalize)
        spec = config.kernel_spec()
        req = SelectionRequest(emb=emb, k=config.k, method=config.method,
                               lam=config.lam, m=config.m, kernel=spec)
        result = select(req, parallel=config.parallel)
    except SelectionError as exc:
        write_json_document(out_path, _error_document(exc))
        return exc.code

    timings = {"load_ms": load_ms}
    timings.update(result.timing)
    doc = {
        "schema": RESULT_SCHEMA,
        "engine_version": __version__,
        "method": config.method,
        "k": config.k,
        "lambda": config.lam,
        "m": config.m,
        "kernel_alphas": list(spec.alphas),
        "normalize": config.normalize,
        "parallel": config.parallel,
        "indices": list(result.indices),
        "allocation": list(result.allocation),
        "score": result.score,
        "timings_ms": timings,
    }
    write_json_document(out_path, doc)
    return 0


def _parse_alphas(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise InputError(f"bad kernel grid {text!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="framepick",
                                     description="Query-aware key-frame selection.")
    parser.add_argument("--version", action="version", version=f"framepick {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sel = sub.add_parser("select", help="select frames from embedding files")
    sel.add_argument("--frames", required=True, help="frame embedding file (binary or CSV)")
    sel.add_argument("--query", required=True, help="query embedding file; rows are pooled")
    sel.add_argument("--k", type=int, required=True, help="number of frames to select")
    sel.add_argument("--method", default="mdp3")
    sel.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA,
                     help="relevance/diversity trade-off (smaller favors relevance)")
    sel.add_argument("--segment", dest="m", type=int, default=DEFAULT_SEGMENT_SIZE,
                     help="segment size in frames")
    sel.add_argument("--kernel", default=None, metavar="A1,A2,...",
                     help="comma-separated bandwidth^2 grid (uniform weights)")
    sel.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=True,
                     help="L2-normalize embeddings on ingestion")
    sel.add_argument("--parallel", action="store_true",
                     help="parallelize the DP stage relaxations")
    sel.add_argument("--out", required=True, help="result document path (JSON)")

    ben = sub.add_parser("bench", help="run the synthetic comparison harness")
    ben.add_argument("--gen", default="", metavar="n=...,d=...,planted=...,seed=...",
                     help="planted-relevance generator spec")
    ben.add_argument("--methods", default=",".join(("mdp3", "dpp", "topk", "uniform")))
    ben.add_argument("--k", type=int, default=8)
    ben.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA)
    ben.add_argument("--segment", dest="m", type=int, default=DEFAULT_SEGMENT_SIZE)
    ben.add_argument("--kernel", default=None)
    ben.add_argument("--parallel", action="store_true")
    ben.add_argument("--timing-grid", default=None, metavar="N1,N2,...",
                     help="also time the DP selector at these frame counts")
    ben.add_argument("--timing-repeats", type=int, default=1)
    ben.add_argument("--out", required=True, help="report document path (JSON)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "select":
            alphas = _parse_alphas(args.kernel) if args.kernel else None
            config = RunConfig(method=args.method, k=args.k, lam=args.lam, m=args.m,
                               kernel_alphas=alphas, normalize=args.normalize,
                               parallel=args.parallel)
            return run_select(config, args.frames, args.query, args.out)

        gen = parse_generator_spec(args.gen)
        methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
        kernel = KernelSpec.from_alphas(_parse_alphas(args.kernel)) if args.kernel else None
        grid = [int(v) for v in args.timing_grid.split(",")] if args.timing_grid else None
        report = run_bench(gen, methods, k=args.k, lam=args.lam, m=args.m,
                           kernel=kernel, parallel=args.parallel,
                           timing_grid=grid, timing_repeats=args.timing_repeats)
        doc = {"schema": "frame-select-bench/v1", "engine_version": __version__}
        doc.update(report)
        write_json_document(args.out, doc)
        print(render_report(report))
        return 0
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
