"""Kernel construction, conditioning, and their exact identities."""

import itertools
import math

import numpy as np
import pytest

from framepick import (
    ConditionedKernel,
    EmbeddingSet,
    InputError,
    KernelSpec,
    build_relevance,
    build_similarity,
    condition_kernel,
    multi_gaussian,
    pool_query_chunks,
)


def random_embeddings(seed, n, d):
    rng = np.random.default_rng(seed)
    return EmbeddingSet.from_arrays(rng.standard_normal((n, d)), rng.standard_normal(d))


class TestPoolQueryChunks:
    def test_single_chunk_normalizes(self):
        np.testing.assert_allclose(pool_query_chunks([[0.0, 2.0, 0.0]]), [0.0, 1.0, 0.0])

    def test_mean_then_unit_norm(self):
        got = pool_query_chunks([[1.0, 0.0], [0.0, 1.0]])
        np.testing.assert_allclose(got, [1 / math.sqrt(2)] * 2, atol=1e-12)

    def test_matches_reference_pooling(self):
        rng = np.random.default_rng(3)
        chunks = rng.standard_normal((3, 6))
        chunks /= np.linalg.norm(chunks, axis=1, keepdims=True)
        ref = chunks.mean(axis=0) / np.linalg.norm(chunks.mean(axis=0))
        np.testing.assert_allclose(pool_query_chunks(chunks), ref, atol=1e-12)

    def test_zero_pool_rejected(self):
        with pytest.raises(InputError, match="degenerate query embedding"):
            pool_query_chunks([[1.0, 0.0], [-1.0, 0.0]])

    def test_nan_rejected(self):
        with pytest.raises(InputError):
            pool_query_chunks([[np.nan, 1.0]])


class TestKernelSpec:
    def test_default_grid(self):
        spec = KernelSpec.default_grid()
        assert spec.alphas == (0.125, 0.25, 1.0, 2.0, 4.0)
        assert spec.count == 5
        assert abs(sum(spec.betas) - 1.0) <= 1e-12

    def test_invalid_specs_rejected(self):
        with pytest.raises(InputError):
            KernelSpec(((0.0, 1.0),))
        with pytest.raises(InputError):
            KernelSpec(((1.0, -0.5), (1.0, 1.5)))
        with pytest.raises(InputError):
            KernelSpec(((1.0, 0.4), (2.0, 0.4)))  # weights sum to 0.8


class TestMultiGaussian:
    def test_identical_inputs_give_one(self):
        spec = KernelSpec.default_grid()
        x = np.array([0.3, -0.4, 0.5])
        assert multi_gaussian(x, x, spec) == pytest.approx(1.0, abs=1e-12)

    def test_single_kernel_closed_form(self):
        spec = KernelSpec.from_alphas([1.0])
        # squared distance 2
        assert multi_gaussian([1.0, 0.0], [0.0, 1.0], spec) == pytest.approx(
            math.exp(-1.0), abs=1e-12
        )

    def test_default_grid_matches_term_sum(self):
        spec = KernelSpec.default_grid()
        x, y = np.array([0.5, 0.5]), np.array([0.5 + 1.0, 0.5])  # squared distance 1
        ref = sum(0.2 * math.exp(-1.0 / (2.0 * a)) for a in (0.125, 0.25, 1.0, 2.0, 4.0))
        assert multi_gaussian(x, y, spec) == pytest.approx(ref, abs=1e-12)

    def test_symmetry_and_range(self):
        spec = KernelSpec.default_grid()
        rng = np.random.default_rng(0)
        for _ in range(20):
            x, y = rng.standard_normal(4), rng.standard_normal(4)
            v = multi_gaussian(x, y, spec)
            assert v == multi_gaussian(y, x, spec)
            assert 0.0 < v <= 1.0
            assert v < 1.0  # distinct points stay strictly below one

    def test_non_finite_rejected(self):
        spec = KernelSpec.default_grid()
        with pytest.raises(InputError):
            multi_gaussian([np.inf, 0.0], [0.0, 0.0], spec)


class TestRelevanceAndSimilarity:
    def test_frame_equal_to_query(self):
        spec = KernelSpec.default_grid()
        q = np.array([1.0, 0.0, 0.0])
        emb = EmbeddingSet.from_arrays([q, [0.0, 1.0, 0.0]], q)
        r = build_relevance(emb, spec)
        assert r[0] == pytest.approx(1.0, abs=1e-12)

    def test_equidistant_frames_tie(self):
        spec = KernelSpec.default_grid()
        emb = EmbeddingSet.from_arrays([[0.0, 1.0], [0.0, -1.0]], [1.0, 0.0])
        r = build_relevance(emb, spec)
        assert r[0] == pytest.approx(r[1], abs=1e-12)

    def test_relevance_matches_entrywise_kernel(self):
        spec = KernelSpec.default_grid()
        emb = random_embeddings(11, 5, 4)
        r = build_relevance(emb, spec)
        ref = [multi_gaussian(f, emb.query, spec) for f in emb.frames]
        np.testing.assert_allclose(r, ref, atol=1e-12)
        assert np.all(r > 0) and np.all(r <= 1)

    def test_similarity_identical_frames(self):
        spec = KernelSpec.default_grid()
        emb = EmbeddingSet.from_arrays([[1.0, 0.0], [1.0, 0.0]], [0.0, 1.0])
        L = build_similarity(emb, spec)
        assert L[0, 1] == pytest.approx(1.0, abs=1e-12)

    def test_single_frame(self):
        spec = KernelSpec.default_grid()
        emb = EmbeddingSet.from_arrays([[0.0, 2.0]], [1.0, 0.0])
        np.testing.assert_array_equal(build_similarity(emb, spec), [[1.0]])

    def test_similarity_symmetric_psd(self):
        spec = KernelSpec.default_grid()
        emb = random_embeddings(5, 6, 3)
        L = build_similarity(emb, spec)
        np.testing.assert_array_equal(L, L.T)
        np.testing.assert_array_equal(np.diag(L), np.ones(6))
        assert np.linalg.eigvalsh(L).min() >= -1e-8
        ref = [[multi_gaussian(a, b, spec) for b in emb.frames] for a in emb.frames]
        np.testing.assert_allclose(L, ref, atol=1e-12)


class TestConditionKernel:
    def test_unit_relevance_is_identity(self):
        spec = KernelSpec.default_grid()
        emb = random_embeddings(1, 5, 3)
        L = build_similarity(emb, spec)
        for lam in (0.2, 1.0, 7.0):
            ck = condition_kernel(L, np.ones(5), lam)
            np.testing.assert_array_equal(ck.Ltilde, L)

    def test_lambda_one_direct_scaling(self):
        L = np.array([[1.0, 0.5], [0.5, 1.0]])
        r = np.array([0.9, 0.4])
        ck = condition_kernel(L, r, 1.0)
        ref = [[r[i] * L[i, j] * r[j] for j in range(2)] for i in range(2)]
        np.testing.assert_allclose(ck.Ltilde, ref, atol=1e-15)

    def test_logdet_identity_all_subsets(self):
        spec = KernelSpec.default_grid()
        emb = random_embeddings(2, 4, 6)
        L = build_similarity(emb, spec)
        r = build_relevance(emb, spec)
        lam = 0.2
        ck = condition_kernel(L, r, lam)
        for size in range(5):
            for S in itertools.combinations(range(4), size):
                S = list(S)
                lhs = np.linalg.slogdet(ck.Ltilde[np.ix_(S, S)])[1] if S else 0.0
                rhs = (np.sum(np.log(r[S] ** 2)) / lam if S else 0.0) + (
                    np.linalg.slogdet(L[np.ix_(S, S)])[1] if S else 0.0
                )
                assert lhs == pytest.approx(rhs, abs=1e-8)

    def test_nonpositive_relevance_rejected(self):
        with pytest.raises(InputError, match="nonpositive relevance"):
            condition_kernel(np.eye(2), np.array([0.5, 0.0]), 1.0)

    def test_asymmetric_similarity_rejected(self):
        with pytest.raises(InputError, match="not symmetric"):
            condition_kernel(np.array([[1.0, 0.5], [0.2, 1.0]]), np.ones(2), 1.0)


class TestKernelProperties:
    @pytest.mark.parametrize("lam", [0.2, 1.0, 5.0])
    @pytest.mark.parametrize("seed", range(4))
    def test_decomposition_every_subset(self, seed, lam):
        spec = KernelSpec.default_grid()
        n = 6
        emb = random_embeddings(seed, n, 8)
        L = build_similarity(emb, spec)
        r = build_relevance(emb, spec)
        Lt = condition_kernel(L, r, lam).Ltilde
        for size in range(1, n + 1):
            for S in itertools.combinations(range(n), size):
                S = list(S)
                gap = (
                    np.linalg.slogdet(Lt[np.ix_(S, S)])[1]
                    - np.linalg.slogdet(L[np.ix_(S, S)])[1]
                    - np.sum(np.log(r[S] ** 2)) / lam
                )
                assert abs(gap) < 1e-8

    def test_bandwidth_lambda_equivalence(self):
        # exponent 1/lam on a bandwidth-alpha relevance == exponent 1 on a
        # bandwidth-(lam*alpha) relevance
        lam, alpha = 0.2, 2.0
        emb = random_embeddings(9, 7, 5)
        L = build_similarity(emb, KernelSpec.default_grid())
        r_a = build_relevance(emb, KernelSpec.from_alphas([alpha]))
        r_la = build_relevance(emb, KernelSpec.from_alphas([lam * alpha]))
        lhs = condition_kernel(L, r_a, lam).Ltilde
        rhs = condition_kernel(L, r_la, 1.0).Ltilde
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    @pytest.mark.parametrize("n", [4, 16, 32])
    def test_psd_preserved_by_diagonal_scaling(self, n):
        rng = np.random.default_rng(n)
        emb = EmbeddingSet.from_arrays(rng.standard_normal((n, 8)), rng.standard_normal(8))
        L = build_similarity(emb, KernelSpec.default_grid())
        v = rng.uniform(0.1, 2.0, n)
        scaled = L * np.outer(v, v)
        assert np.linalg.eigvalsh(scaled).min() >= -1e-8


class TestEmbeddingSet:
    def test_normalization_applied(self):
        rng = np.random.default_rng(0)
        emb = EmbeddingSet.from_arrays(3.0 * rng.standard_normal((10, 4)), rng.standard_normal(4))
        assert np.abs(np.linalg.norm(emb.frames, axis=1) - 1.0).max() < 1e-6
        assert abs(np.linalg.norm(emb.query) - 1.0) < 1e-6

    def test_normalize_flag_off_keeps_rows(self):
        frames = np.array([[3.0, 0.0], [0.0, 0.5]])
        emb = EmbeddingSet.from_arrays(frames, [1.0, 1.0], normalize=False)
        np.testing.assert_array_equal(emb.frames, frames)

    def test_rejects_bad_shapes_and_values(self):
        with pytest.raises(InputError):
            EmbeddingSet.from_arrays(np.ones((2, 3)), np.ones(4))
        with pytest.raises(InputError):
            EmbeddingSet.from_arrays(np.array([[np.nan, 1.0]]), np.ones(2))
        with pytest.raises(InputError):
            EmbeddingSet.from_arrays(np.array([[0.0, 0.0]]), np.ones(2))


class TestLazyBacking:
    def test_lazy_blocks_match_dense(self):
        spec = KernelSpec.default_grid()
        emb = random_embeddings(4, 12, 5)
        lam = 0.5
        lazy = ConditionedKernel.from_embeddings(emb, spec, lam)
        dense = condition_kernel(build_similarity(emb, spec), build_relevance(emb, spec), lam)
        idx = [1, 4, 7, 9]
        np.testing.assert_allclose(lazy.block(idx), dense.block(idx), atol=1e-12)
        np.testing.assert_allclose(lazy.row(3, idx), dense.row(3, idx), atol=1e-12)
        np.testing.assert_allclose(lazy.diag(idx), dense.diag(idx), atol=1e-12)
        np.testing.assert_allclose(lazy.Ltilde, dense.Ltilde, atol=1e-12)
