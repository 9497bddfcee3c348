"""Planted-relevance generator and the comparison harness."""

import numpy as np
import pytest

from framepick import InputError
from framepick.bench import (
    GeneratorSpec,
    loglog_slope,
    parse_generator_spec,
    planted_instance,
    render_report,
    run_bench,
    timing_report,
)


class TestGeneratorSpec:
    def test_parse_round_trip(self):
        gen = parse_generator_spec("n=96,d=8,planted=6,segment=1,noise=0.05,seed=3,trials=2")
        assert gen == GeneratorSpec(n=96, d=8, planted=6, segment=1, noise=0.05, seed=3, trials=2)

    def test_parse_rejects_unknown_keys(self):
        with pytest.raises(InputError, match="unknown generator spec key"):
            parse_generator_spec("n=10,fancy=2")
        with pytest.raises(InputError, match="invalid generator spec"):
            parse_generator_spec("n=ten")

    def test_validation(self):
        with pytest.raises(InputError, match="invalid generator spec"):
            GeneratorSpec(n=32, planted=40).validate(m=32)
        with pytest.raises(InputError, match="segment"):
            GeneratorSpec(n=32, planted=4, segment=5).validate(m=32)

    def test_planted_frames_live_in_segment(self):
        gen = GeneratorSpec(n=96, d=8, planted=6, segment=2, noise=0.1, seed=0)
        frames, query, idx = planted_instance(gen, m=32)
        assert frames.shape == (96, 8)
        assert np.all((idx >= 64) & (idx < 96))
        assert len(idx) == 6

    def test_noiseless_planted_equal_query(self):
        gen = GeneratorSpec(n=64, d=8, planted=4, segment=0, noise=0.0, seed=1)
        frames, query, idx = planted_instance(gen, m=32)
        np.testing.assert_allclose(frames[idx], np.tile(query, (4, 1)), atol=1e-12)


class TestRunBench:
    def test_noiseless_topk_recall_is_one(self):
        gen = GeneratorSpec(n=96, d=8, planted=12, segment=1, noise=0.0, seed=5, trials=3)
        report = run_bench(gen, ("topk",), k=8, m=32)
        assert report["methods"]["topk"]["recall_mean"] == 1.0

    def test_dpp_less_redundant_than_topk(self):
        gen = GeneratorSpec(n=128, d=16, planted=20, segment=1, noise=0.05, seed=11, trials=10)
        report = run_bench(gen, ("dpp", "topk"), k=8, m=32)
        m = report["methods"]
        assert m["dpp"]["redundancy_mean"] <= m["topk"]["redundancy_mean"]

    def test_report_render_contains_rows(self):
        gen = GeneratorSpec(n=64, d=8, planted=6, segment=0, noise=0.1, seed=2, trials=1)
        report = run_bench(gen, ("uniform", "topk"), k=4, m=32)
        text = render_report(report)
        assert "uniform" in text and "topk" in text and "recall" in text


class TestTiming:
    def test_slope_of_exact_power_law(self):
        ns = [100, 400, 1600]
        assert loglog_slope(ns, [n / 100 for n in ns]) == pytest.approx(1.0, abs=1e-12)
        assert loglog_slope(ns, [(n / 100) ** 2 for n in ns]) == pytest.approx(2.0, abs=1e-12)

    def test_timing_report_smoke(self):
        rep = timing_report([64, 256], d=8, k=4, m=16, seed=0)
        assert rep["n"] == [64, 256]
        assert len(rep["time_ms"]) == 2
        assert all(t > 0 for t in rep["time_ms"])

    def test_grid_must_cover_budget(self):
        with pytest.raises(InputError, match="timing grid"):
            timing_report([4], k=8)
