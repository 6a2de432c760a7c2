"""Subspaces of R^n held as orthonormal column bases, with SVD rank decisions."""

from __future__ import annotations

import os
from dataclasses import dataclass, asdict
from enum import Enum

import numpy as np


@dataclass(frozen=True)
class ToleranceConfig:
    rank_rel: float = 1e-8
    eq_tol: float = 1e-8
    eig_tol: float = 1e-7
    # singular values below this are zero even when they are all that is left
    abs_floor: float = 1e-13

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not v > 0:
                raise ValueError(f"tolerance {k} must be positive, got {v}")

    @classmethod
    def from_env(cls, environ=None):
        env = os.environ if environ is None else environ
        kw = {}
        for field, var in (("rank_rel", "PSMECH_TOL_RANK"), ("eq_tol", "PSMECH_TOL_EQ"),
                           ("eig_tol", "PSMECH_TOL_EIG"), ("abs_floor", "PSMECH_TOL_FLOOR")):
            if env.get(var):
                kw[field] = float(env[var])
        return cls(**kw)

    def as_dict(self):
        return asdict(self)


DEFAULT = ToleranceConfig()


@dataclass(frozen=True)
class SubspaceBasis:
    n: int
    B: np.ndarray  # n x m, orthonormal columns
    tol: float = DEFAULT.rank_rel

    @property
    def dim(self) -> int:
        return self.B.shape[1]

    def __repr__(self):
        return f"SubspaceBasis(n={self.n}, dim={self.dim})"

    def projector(self) -> np.ndarray:
        return self.B @ self.B.T

    def vectors(self):
        return [self.B[:, i] for i in range(self.dim)]


def _rank(s, cfg, scale=None):
    # scale: magnitude of the data a product matrix was built from, so that
    # pure round-off in the product is not mistaken for rank
    if s.size == 0 or s[0] <= cfg.abs_floor:
        return 0
    ref = s[0] if scale is None else max(s[0], scale)
    return int(np.sum(s >= cfg.rank_rel * ref))


def _basis(n, cols, cfg):
    return SubspaceBasis(n, np.ascontiguousarray(cols).reshape(n, -1), cfg.rank_rel)


def zero(n: int, cfg: ToleranceConfig = DEFAULT) -> SubspaceBasis:
    return _basis(n, np.zeros((n, 0)), cfg)


def whole(n: int, cfg: ToleranceConfig = DEFAULT) -> SubspaceBasis:
    return _basis(n, np.eye(n), cfg)


def span(vectors, n: int | None = None, cfg: ToleranceConfig = DEFAULT) -> SubspaceBasis:
    """Orthonormal basis of the span of ``vectors`` (a list or an n x m array of columns).

    >>> span([[1, 0], [2, 0]]).dim
    1
    """
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        M = vectors
        if n is not None and M.shape[0] != n:
            raise ValueError(f"expected vectors of length {n}, got {M.shape[0]}")
        n = M.shape[0]
    else:
        vecs = [np.asarray(v, dtype=float).ravel() for v in vectors]
        if not vecs:
            if n is None:
                raise ValueError("empty span needs an ambient dimension")
            return zero(n, cfg)
        lens = {len(v) for v in vecs}
        if len(lens) != 1 or (n is not None and lens != {n}):
            raise ValueError(f"inconsistent vector lengths {sorted(lens)}")
        n = lens.pop()
        M = np.column_stack(vecs)
    if M.shape[1] == 0:
        return zero(n, cfg)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    return _basis(n, U[:, :_rank(s, cfg)], cfg)


def nullspace(M, n: int | None = None, cfg: ToleranceConfig = DEFAULT, scale=None) -> SubspaceBasis:
    """Right nullspace of the row system ``M`` (rows are constraints)."""
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M.reshape(1, -1) if M.size else M.reshape(0, n or 0)
    n = M.shape[1] if n is None else n
    if M.shape[0] == 0:
        return whole(n, cfg)
    if M.shape[1] != n:
        raise ValueError(f"constraint rows have length {M.shape[1]}, expected {n}")
    _, s, Vt = np.linalg.svd(M, full_matrices=True)
    r = _rank(s, cfg, scale)
    return _basis(n, Vt[r:].T, cfg)


def rank(M, cfg: ToleranceConfig = DEFAULT, scale=None) -> int:
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    return _rank(np.linalg.svd(M, compute_uv=False), cfg, scale)


def _check(U, V):
    if U.n != V.n:
        raise ValueError(f"ambient dimension mismatch: {U.n} vs {V.n}")


def sum_(U: SubspaceBasis, V: SubspaceBasis, cfg: ToleranceConfig = DEFAULT) -> SubspaceBasis:
    _check(U, V)
    return span(np.hstack([U.B, V.B]), U.n, cfg)


def sum_all(spaces, n: int, cfg: ToleranceConfig = DEFAULT) -> SubspaceBasis:
    blocks = [S.B for S in spaces]
    if not blocks:
        return zero(n, cfg)
    return span(np.hstack(blocks), n, cfg)


def intersect(U: SubspaceBasis, V: SubspaceBasis, cfg: ToleranceConfig = DEFAULT) -> SubspaceBasis:
    """Solve U a = V b; the intersection is spanned by the vectors U a."""
    _check(U, V)
    if U.dim == 0 or V.dim == 0:
        return zero(U.n, cfg)
    K = nullspace(np.hstack([U.B, -V.B]), cfg=cfg)
    return span(U.B @ K.B[:U.dim], U.n, cfg)


def intersect_all(spaces, n: int, cfg: ToleranceConfig = DEFAULT) -> SubspaceBasis:
    out = whole(n, cfg)
    for S in spaces:
        out = intersect(out, S, cfg)
    return out


def residual(U: SubspaceBasis, V: SubspaceBasis) -> float:
    """Largest distance from a unit basis vector of V to the subspace U."""
    _check(U, V)
    if V.dim == 0:
        return 0.0
    R = V.B - U.B @ (U.B.T @ V.B)
    return float(np.max(np.linalg.norm(R, axis=0)))


def contains(U: SubspaceBasis, v, cfg: ToleranceConfig = DEFAULT) -> bool:
    v = np.asarray(v, dtype=float)
    if v.shape != (U.n,):
        raise ValueError(f"vector has shape {v.shape}, expected ({U.n},)")
    nv = np.linalg.norm(v)
    if nv == 0:
        return True
    return np.linalg.norm(v - U.B @ (U.B.T @ v)) / nv < cfg.eq_tol


def is_subset(V: SubspaceBasis, U: SubspaceBasis, cfg: ToleranceConfig = DEFAULT) -> bool:
    return residual(U, V) < cfg.eq_tol


def equality_residual(U: SubspaceBasis, V: SubspaceBasis) -> float:
    return max(residual(U, V), residual(V, U))


def equals(U: SubspaceBasis, V: SubspaceBasis, cfg: ToleranceConfig = DEFAULT) -> bool:
    return U.dim == V.dim and equality_residual(U, V) < cfg.eq_tol


def orth_complement_within(W: SubspaceBasis, L: SubspaceBasis,
                           cfg: ToleranceConfig = DEFAULT) -> SubspaceBasis:
    """Euclidean orthogonal complement of W inside L (W need not lie in L)."""
    _check(W, L)
    if L.dim == 0:
        return zero(L.n, cfg)
    if W.dim == 0:
        return L
    K = nullspace(W.B.T @ L.B, cfg=cfg)
    return span(L.B @ K.B, L.n, cfg)


def _check_skew(A, tol=1e-10):
    A = np.asarray(A, dtype=float)
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if A.size and np.max(np.abs(A + A.T)) > tol * scale:
        raise ValueError("form matrix is not skew-symmetric")
    return A


def k_orth_complement(W: SubspaceBasis, forms, cfg: ToleranceConfig = DEFAULT) -> SubspaceBasis:
    """{v : w^T A v = 0 for every w in W and every matrix A in ``forms``}."""
    mats = [_check_skew(A) for A in forms]
    if W.dim == 0 or not mats:
        return whole(W.n, cfg)
    rows = np.vstack([W.B.T @ A for A in mats])
    return nullspace(rows, W.n, cfg)


def restrict_bilinear(H, S: SubspaceBasis) -> np.ndarray:
    H = np.asarray(H, dtype=float)
    if H.shape != (S.n, S.n):
        raise ValueError(f"matrix shape {H.shape} does not match ambient dimension {S.n}")
    R = S.B.T @ H @ S.B
    return 0.5 * (R + R.T)


class Definiteness(str, Enum):
    PositiveDefinite = "PositiveDefinite"
    NegativeDefinite = "NegativeDefinite"
    PositiveSemidefinite = "PositiveSemidefinite"
    NegativeSemidefinite = "NegativeSemidefinite"
    Indefinite = "Indefinite"
    Zero = "Zero"


def definiteness(H, eig_tol: float = DEFAULT.eig_tol, scale: float = 0.0) -> Definiteness:
    """Classify a symmetric matrix by the signs of its eigenvalues.

    Eigenvalues within eig_tol * max(1, |lambda|_max, scale) of zero count as zero.
    """
    H = np.asarray(H, dtype=float)
    if H.size == 0:
        return Definiteness.Zero
    lam = np.linalg.eigvalsh(0.5 * (H + H.T))
    cut = eig_tol * max(1.0, float(np.max(np.abs(lam))), scale)
    pos = int(np.sum(lam > cut))
    neg = int(np.sum(lam < -cut))
    m = len(lam)
    if pos == m:
        return Definiteness.PositiveDefinite
    if neg == m:
        return Definiteness.NegativeDefinite
    if pos and neg:
        return Definiteness.Indefinite
    if pos:
        return Definiteness.PositiveSemidefinite
    if neg:
        return Definiteness.NegativeSemidefinite
    return Definiteness.Zero
