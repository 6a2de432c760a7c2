"""k-polysymplectic structures, omega-Hamiltonian fields and the k-bracket.

Convention: omega^a(u, v) = u^T A^a v and i_X omega = omega(X, .), so a
Hamiltonian field solves (A^a)^T X = grad h^a for every a.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import subspace as sub
from .subspace import DEFAULT, ToleranceConfig

SKEW_TOL = 1e-10
CLOSED_TOL = 1e-6
SOLVE_TOL = 1e-8
DERIVATION_TOL = 1e-6


class ResidualTooLarge(ValueError):
    """h is not omega-Hamiltonian at the given point."""

    def __init__(self, residual, bound, point=None):
        self.residual = residual
        self.bound = bound
        self.point = point
        super().__init__(f"least-squares residual {residual:.3g} exceeds {bound:.3g}")


class PolySymplecticStructure:
    """k skew matrix fields A^1..A^k on R^n.

    Each form needs ``value(p)`` (n x n) and ``derivative(p)`` with
    ``D[i, j, l] = dA_ij/dx_l``; :class:`~psmech.expr.MatrixFieldExpr` fits.
    """

    def __init__(self, forms, n: int | None = None):
        self.forms = list(forms)
        self.k = len(self.forms)
        self.n = n if n is not None else self.forms[0].n

    def matrices(self, p):
        return [A.value(p) for A in self.forms]

    def derivatives(self, p):
        return [A.derivative(p) for A in self.forms]

    def kernel(self, alpha: int, p, cfg: ToleranceConfig = DEFAULT) -> sub.SubspaceBasis:
        return sub.nullspace(self.forms[alpha].value(p), self.n, cfg)

    def joint_kernel(self, p, cfg: ToleranceConfig = DEFAULT) -> sub.SubspaceBasis:
        return sub.nullspace(np.vstack(self.matrices(p)), self.n, cfg)


class KFunction:
    """k scalar fields h^1..h^k."""

    def __init__(self, components):
        self.components = list(components)
        self.k = len(self.components)
        self.n = self.components[0].n if self.components else 0

    def __getitem__(self, a):
        return self.components[a]

    def value(self, p) -> np.ndarray:
        return np.array([h.value(p) for h in self.components])

    def grads(self, p) -> np.ndarray:
        return np.array([h.grad(p) for h in self.components]).reshape(self.k, -1)

    def hessians(self, p):
        return [h.hessian(p) for h in self.components]


@dataclass
class HamiltonianSolve:
    X: np.ndarray
    residual: float
    bound: float

    @property
    def accepted(self) -> bool:
        return self.residual < self.bound

    def require(self, p=None) -> np.ndarray:
        if not self.accepted:
            raise ResidualTooLarge(self.residual, self.bound, p)
        return self.X


def _stacked(P, p):
    return np.vstack([A.T for A in P.matrices(p)])


def hamiltonian_field_at(P: PolySymplecticStructure, h: KFunction, p) -> HamiltonianSolve:
    """Least-squares solve of (A^a)^T X = grad h^a for all a at once."""
    if h.k != P.k:
        raise ValueError(f"{h.k} Hamiltonian components for {P.k} forms")
    M = _stacked(P, p)
    b = h.grads(p).ravel()
    X, *_ = np.linalg.lstsq(M, b, rcond=None)
    res = float(np.linalg.norm(M @ X - b))
    return HamiltonianSolve(X, res, SOLVE_TOL * (1.0 + float(np.linalg.norm(b))))


def hamiltonian_field_jacobian(P: PolySymplecticStructure, h: KFunction, p, X=None) -> np.ndarray:
    """d X_h / dx at p, from differentiating the stacked system (A^a)^T X = grad h^a."""
    if X is None:
        X = hamiltonian_field_at(P, h, p).require(p)
    n = P.n
    M = _stacked(P, p)
    Minv = np.linalg.pinv(M)
    dM = np.vstack([np.transpose(D, (1, 0, 2)) for D in P.derivatives(p)])  # (kn, n, n): [r, i, l]
    dB = np.vstack(h.hessians(p))  # (kn, n): [r, l]
    rhs = dB - np.einsum("ril,i->rl", dM, X)
    J = Minv @ rhs
    return J.reshape(n, n)


class HamiltonianVectorField:
    """X_h as a vector field object with value() and jacobian()."""

    def __init__(self, P, h):
        self.P = P
        self.h = h
        self.n = P.n

    def value(self, p):
        return hamiltonian_field_at(self.P, self.h, p).require(p)

    def __call__(self, p):
        return self.value(p)

    def jacobian(self, p):
        return hamiltonian_field_jacobian(self.P, self.h, p)


def skew_defect(A) -> float:
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    return float(np.max(np.abs(A + A.T))) / scale if A.size else 0.0


def closure_defect(D) -> float:
    """Relative size of the 3-form coefficients d_i A_jl + d_j A_li + d_l A_ij."""
    if D.size == 0:
        return 0.0
    C = np.transpose(D, (2, 0, 1)) + np.transpose(D, (1, 2, 0)) + D
    return float(np.max(np.abs(C))) / max(1.0, float(np.max(np.abs(D))))


@dataclass
class PointCheck:
    point: list
    skew_defect: float
    closure_defect: float
    kernel_dims: list
    joint_kernel_dim: int
    passed: bool


@dataclass
class StructureReport:
    points: list = field(default_factory=list)
    passed: bool = True

    def as_dict(self):
        return {"passed": self.passed,
                "points": [vars(c) for c in self.points]}


def verify_structure(P: PolySymplecticStructure, points, cfg: ToleranceConfig = DEFAULT) -> StructureReport:
    points = [np.asarray(p, dtype=float) for p in points]
    if not points:
        raise ValueError("verify_structure needs at least one sample point")
    rep = StructureReport()
    for p in points:
        mats = P.matrices(p)
        sk = max(skew_defect(A) for A in mats)
        cl = max(closure_defect(D) for D in P.derivatives(p))
        kd = [sub.nullspace(A, P.n, cfg).dim for A in mats]
        jk = sub.nullspace(np.vstack(mats), P.n, cfg).dim
        ok = sk < SKEW_TOL and cl < CLOSED_TOL and jk == 0
        rep.points.append(PointCheck(p.tolist(), sk, cl, kd, jk, ok))
        rep.passed &= ok
    return rep


def contraction_differential(A, D, X, JX) -> np.ndarray:
    """dC[j, l] = d_l (A^T X)_j for the one-form c = i_X omega."""
    return A.T @ JX + np.einsum("i,ijl->jl", X, D)


def closedness_defect(A, D, X, JX) -> float:
    dC = contraction_differential(A, D, X, JX)
    curl = dC - dC.T
    return float(np.max(np.abs(curl))) / max(1.0, float(np.max(np.abs(dC))))


def is_hamiltonian_field(P: PolySymplecticStructure, X, points, tol: float = CLOSED_TOL):
    """Per form: is i_X omega^a closed at every sample point?

    Returns (verdicts, defects) with one entry per form.
    """
    defects = [0.0] * P.k
    for p in points:
        p = np.asarray(p, dtype=float)
        Xv, JX = X.value(p), X.jacobian(p)
        for a, (A, D) in enumerate(zip(P.matrices(p), P.derivatives(p))):
            defects[a] = max(defects[a], closedness_defect(A, D, Xv, JX))
    return [d < tol for d in defects], defects


def bracket_k(P: PolySymplecticStructure, h: KFunction, g: KFunction, p) -> np.ndarray:
    """{h, g}^a = omega^a(X_h, X_g)."""
    Xh = hamiltonian_field_at(P, h, p).require(p)
    Xg = hamiltonian_field_at(P, g, p).require(p)
    return np.array([Xh @ A @ Xg for A in P.matrices(p)])


def derivation_check(P: PolySymplecticStructure, h: KFunction, f: KFunction, points):
    """max |X_h . grad f^a - omega^a(X_f, X_h)| over points and forms."""
    worst = 0.0
    for p in points:
        p = np.asarray(p, dtype=float)
        Xh = hamiltonian_field_at(P, h, p).require(p)
        Xf = hamiltonian_field_at(P, f, p).require(p)
        lhs = f.grads(p) @ Xh
        rhs = np.array([Xf @ A @ Xh for A in P.matrices(p)])
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst, worst < DERIVATION_TOL
