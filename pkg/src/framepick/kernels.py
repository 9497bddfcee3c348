"""Relevance vectors and (conditioned) similarity kernels over frame embeddings.

Similarity is an averaged multi-Gaussian kernel

    k(x, y) = sum_u beta_u * exp(-||x - y||^2 / (2 * alpha_u)),

and query conditioning rescales the frame-frame kernel by per-frame relevance
r_i = g(f_i, q) through the diagonal scaling s = r^(1/lambda), so that

    log det(Ltilde_S) = (1/lambda) * sum_{i in S} log(r_i^2) + log det(L_S)

holds exactly for every index subset S.  Small lambda weights query relevance
over list-wise diversity; lambda = 1 recovers plain diag(r) * L * diag(r).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

# Bandwidth-squared grid 2**i shared by the relevance and similarity kernels,
# with uniform mixture weights.
DEFAULT_ALPHA_EXPONENTS = (-3, -2, 0, 1, 2)
DEFAULT_LAMBDA = 0.2

# Relevance is floored before 1/lambda powers and logs so a frame that
# underflows double precision stays selectable-but-worthless instead of
# producing -inf scores.
RELEVANCE_FLOOR = 1e-300


def _as_float_matrix(a, name: str) -> np.ndarray:
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise InputError(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError(f"{name} contains non-finite values")
    return m


def _as_float_vector(a, name: str) -> np.ndarray:
    v = np.asarray(a, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] < 1:
        raise InputError(f"{name} must be a non-empty 1-D array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InputError(f"{name} contains non-finite values")
    return v


def _unit_rows(m: np.ndarray, name: str) -> np.ndarray:
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise InputError(f"degenerate {name}: zero-norm row")
    return m / norms


def pool_query_chunks(chunks) -> np.ndarray:
    """Pool c query-chunk embeddings (c x d) into one unit-norm d-vector.

    The chunks are averaged and the mean is L2-normalized; a single chunk is
    simply normalized.
    """
    m = _as_float_matrix(chunks, "query chunks")
    pooled = m.mean(axis=0)
    norm = np.linalg.norm(pooled)
    if norm == 0.0:
        raise InputError("degenerate query embedding: chunks pool to the zero vector")
    return pooled / norm


@dataclass(frozen=True)
class EmbeddingSet:
    """n frame embeddings (n x d) plus one query embedding (d,)."""

    frames: np.ndarray
    query: np.ndarray
    normalized: bool = False

    @property
    def n(self) -> int:
        return self.frames.shape[0]

    @property
    def d(self) -> int:
        return self.frames.shape[1]

    @classmethod
    def from_arrays(cls, frames, query, normalize: bool = True) -> "EmbeddingSet":
        """Validate and ingest raw arrays, L2-normalizing rows by default.

        Normalization bounds every pairwise squared distance by 4, which keeps
        the fixed bandwidth grid meaningful across embedding encoders.
        """
        f = _as_float_matrix(frames, "frames")
        q = _as_float_vector(query, "query")
        if q.shape[0] != f.shape[1]:
            raise InputError(
                f"dimension mismatch: frames have d={f.shape[1]}, query has d={q.shape[0]}"
            )
        if normalize:
            f = _unit_rows(f, "frame embedding")
            qn = np.linalg.norm(q)
            if qn == 0.0:
                raise InputError("degenerate query embedding: zero norm")
            q = q / qn
        return cls(frames=f, query=q, normalized=normalize)


@dataclass(frozen=True)
class KernelSpec:
    """Mixture of Gaussian kernels: (alpha_u = bandwidth^2, beta_u = weight)."""

    components: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.components:
            raise InputError("kernel spec needs at least one component")
        for a, b in self.components:
            if not (a > 0.0) or not np.isfinite(a):
                raise InputError(f"kernel bandwidth^2 must be positive, got {a}")
            if b < 0.0 or not np.isfinite(b):
                raise InputError(f"kernel weight must be nonnegative, got {b}")
        if abs(sum(b for _, b in self.components) - 1.0) > 1e-12:
            raise InputError("kernel weights must sum to 1")

    @property
    def alphas(self) -> tuple[float, ...]:
        return tuple(a for a, _ in self.components)

    @property
    def betas(self) -> tuple[float, ...]:
        return tuple(b for _, b in self.components)

    @property
    def count(self) -> int:
        return len(self.components)

    @classmethod
    def from_alphas(cls, alphas) -> "KernelSpec":
        """Uniform-weight mixture over the given bandwidth-squared values."""
        alphas = tuple(float(a) for a in alphas)
        if not alphas:
            raise InputError("kernel spec needs at least one component")
        w = 1.0 / len(alphas)
        return cls(tuple((a, w) for a in alphas))

    @classmethod
    def default_grid(cls) -> "KernelSpec":
        return cls.from_alphas(2.0**i for i in DEFAULT_ALPHA_EXPONENTS)


def _sq_dists(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Pairwise squared distances between rows of x (a,d) and y (b,d)."""
    xx = np.einsum("ij,ij->i", x, x)
    yy = np.einsum("ij,ij->i", y, y)
    d = xx[:, None] + yy[None, :] - 2.0 * (x @ y.T)
    np.maximum(d, 0.0, out=d)
    return d


def _mix_kernel(sq: np.ndarray, spec: KernelSpec) -> np.ndarray:
    out = np.zeros_like(sq)
    for a, b in spec.components:
        out += b * np.exp(sq / (-2.0 * a))
    np.minimum(out, 1.0, out=out)  # guard against weight-sum roundoff
    return out


def multi_gaussian(x, y, spec: KernelSpec) -> float:
    """Evaluate the kernel mixture on a single pair of vectors; value in (0, 1]."""
    xv = _as_float_vector(x, "x")
    yv = _as_float_vector(y, "y")
    if xv.shape != yv.shape:
        raise InputError(f"shape mismatch: {xv.shape} vs {yv.shape}")
    sq = float(np.sum((xv - yv) ** 2))
    val = sum(b * np.exp(-sq / (2.0 * a)) for a, b in spec.components)
    return float(min(val, 1.0))


def build_relevance(emb: EmbeddingSet, spec: KernelSpec) -> np.ndarray:
    """Frame-query relevance vector r with r_i = k(f_i, q), entries in (0, 1]."""
    sq = _sq_dists(emb.frames, emb.query[None, :])[:, 0]
    out = np.zeros_like(sq)
    for a, b in spec.components:
        out += b * np.exp(sq / (-2.0 * a))
    return np.minimum(out, 1.0)


def build_similarity(emb: EmbeddingSet, spec: KernelSpec) -> np.ndarray:
    """Frame-frame similarity matrix L, symmetric with unit diagonal."""
    k = _mix_kernel(_sq_dists(emb.frames, emb.frames), spec)
    k = 0.5 * (k + k.T)
    np.fill_diagonal(k, 1.0)
    return k


class ConditionedKernel:
    """Conditioned similarity kernel Ltilde = diag(s) * L * diag(s), s = r^(1/lambda).

    Backed either by a dense base matrix or lazily by frame embeddings; the
    lazy form extracts rows and blocks on demand so segment-level consumers
    never materialize the full n x n matrix.
    """

    def __init__(self, r, lam: float, *, dense_base: np.ndarray | None = None,
                 frames: np.ndarray | None = None, spec: KernelSpec | None = None,
                 cosine: bool = False):
        rv = _as_float_vector(r, "relevance")
        if np.any(rv <= 0.0):
            raise InputError("nonpositive relevance")
        if not (lam > 0.0) or not np.isfinite(lam):
            raise InputError(f"lambda must be positive, got {lam}")
        if (dense_base is None) == (frames is None):
            raise InputError("exactly one of dense_base/frames must back the kernel")
        self.r = rv
        self.lam = float(lam)
        self.scale = np.power(np.maximum(rv, RELEVANCE_FLOOR), 1.0 / lam)
        self._base = dense_base
        self._frames = frames
        self._spec = spec
        self._cosine = cosine
        self._l_cache: np.ndarray | None = dense_base
        self._ltilde_cache: np.ndarray | None = None
        if dense_base is not None and dense_base.shape != (rv.shape[0], rv.shape[0]):
            raise InputError("base similarity matrix must be n x n")
        if frames is not None and frames.shape[0] != rv.shape[0]:
            raise InputError("relevance length must match frame count")

    @property
    def n(self) -> int:
        return self.r.shape[0]

    def _base_values(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        if self._base is not None:
            return self._base[np.ix_(rows, cols)]
        if self._cosine:
            v = 0.5 * (1.0 + self._frames[rows] @ self._frames[cols].T)
            return np.clip(v, 0.0, 1.0)
        return _mix_kernel(_sq_dists(self._frames[rows], self._frames[cols]), self._spec)

    def base_block(self, idx) -> np.ndarray:
        """Unconditioned similarity block L[idx, idx]."""
        ii = np.asarray(idx, dtype=np.intp)
        b = self._base_values(ii, ii)
        b = 0.5 * (b + b.T)
        np.fill_diagonal(b, 1.0)
        return b

    def diag(self, idx) -> np.ndarray:
        """diag(Ltilde)[idx]; the base kernel has unit diagonal, so this is s^2."""
        ii = np.asarray(idx, dtype=np.intp)
        if self._base is not None:
            return np.diag(self._base)[ii] * self.scale[ii] ** 2
        return self.scale[ii] ** 2

    def row(self, i: int, idx) -> np.ndarray:
        """Ltilde[i, idx] for a single row i."""
        ii = np.asarray(idx, dtype=np.intp)
        base = self._base_values(np.asarray([i], dtype=np.intp), ii)[0]
        return base * (self.scale[i] * self.scale[ii])

    def block(self, idx) -> np.ndarray:
        """Conditioned similarity block Ltilde[idx, idx]."""
        ii = np.asarray(idx, dtype=np.intp)
        s = self.scale[ii]
        if self._base is not None:
            return self._base[np.ix_(ii, ii)] * np.outer(s, s)
        return self.base_block(ii) * np.outer(s, s)

    @property
    def L(self) -> np.ndarray:
        """Dense base similarity matrix (materialized on first access).

        Materialization only populates a cache; lazily-backed kernels keep
        serving rows/blocks from the embeddings.
        """
        if self._l_cache is None:
            self._l_cache = self.base_block(np.arange(self.n))
        return self._l_cache

    @property
    def Ltilde(self) -> np.ndarray:
        """Dense conditioned matrix (materialized on first access)."""
        if self._ltilde_cache is None:
            self._ltilde_cache = self.L * np.outer(self.scale, self.scale)
        return self._ltilde_cache

    @classmethod
    def from_embeddings(cls, emb: EmbeddingSet, spec: KernelSpec, lam: float,
                        relevance: np.ndarray | None = None) -> "ConditionedKernel":
        """Lazily-backed kernel; `relevance` overrides the computed r (e.g. all
        ones for a query-agnostic variant)."""
        r = build_relevance(emb, spec) if relevance is None else relevance
        return cls(r, lam, frames=emb.frames, spec=spec)

    @classmethod
    def cosine_from_embeddings(cls, emb: EmbeddingSet, lam: float) -> "ConditionedKernel":
        """Shifted-cosine variant: L_ij = (1 + cos(f_i, f_j)) / 2 and
        r_i = (1 + cos(f_i, q)) / 2, both in [0, 1]."""
        frames = emb.frames if emb.normalized else _unit_rows(emb.frames, "frame embedding")
        q = emb.query
        qn = np.linalg.norm(q)
        if qn == 0.0:
            raise InputError("degenerate query embedding: zero norm")
        q = q / qn
        r = np.clip(0.5 * (1.0 + frames @ q), 0.0, 1.0)
        r = np.maximum(r, RELEVANCE_FLOOR)
        return cls(r, lam, frames=frames, cosine=True)


def condition_kernel(L, r, lam: float) -> ConditionedKernel:
    """Condition a dense similarity matrix on relevance r with trade-off lambda."""
    m = _as_float_matrix(L, "similarity matrix")
    if m.shape[0] != m.shape[1]:
        raise InputError(f"similarity matrix must be square, got {m.shape}")
    if np.max(np.abs(m - m.T)) > 1e-8:
        raise InputError("similarity matrix is not symmetric")
    return ConditionedKernel(r, lam, dense_base=m)
