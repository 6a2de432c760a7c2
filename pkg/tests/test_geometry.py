import numpy as np
import pytest
import sympy as sp

from psmech import catalog
from psmech.expr import MatrixFieldExpr, ScalarField, VectorFieldExpr
from psmech.geometry import (KFunction, PolySymplecticStructure, bracket_k, derivation_check,
                             hamiltonian_field_at, hamiltonian_field_jacobian, is_hamiltonian_field,
                             verify_structure)


def structure(forms, n):
    return PolySymplecticStructure([MatrixFieldExpr(F, n) for F in forms], n)


@pytest.fixture(scope="module")
def r3():
    return catalog.load("example-r3")


def r3_points(rng, count):
    pts = rng.uniform([-1, 0.5, -1], [1, 2, 1], size=(count, 3))
    pts[::2, 1] *= -1  # both signs of v
    return pts


def test_r3_structure_is_two_polysymplectic(r3):
    rep = verify_structure(r3.structure, r3_points(np.random.default_rng(1), 30))
    assert rep.passed
    assert all(c.kernel_dims == [1, 1] and c.joint_kernel_dim == 0 for c in rep.points)


def test_solve_matches_pinv_oracle(r3):
    rng = np.random.default_rng(2)
    for p in r3_points(rng, 10):
        mats = r3.structure.matrices(p)
        G = r3.hamiltonian.grads(p)
        oracle = np.linalg.pinv(np.vstack([A.T for A in mats])) @ G.ravel()
        sol = hamiltonian_field_at(r3.structure, r3.hamiltonian, p)
        assert sol.accepted
        assert np.allclose(sol.X, oracle, rtol=1e-10, atol=1e-12)
        u, v, w = p
        assert np.allclose(sol.X, [4 * u * u, 4 * u * v, v * v], rtol=1e-9)


def test_form_derivative_against_sympy(r3):
    u, v, w = sp.symbols("u v w")
    A12 = 4 * w ** 2 / v ** 3
    p = {u: 0.2, v: 1.3, w: -0.6}
    D = r3.structure.derivatives([0.2, 1.3, -0.6])[0]
    assert D[0, 1, 1] == pytest.approx(float(sp.diff(A12, v).subs(p)), rel=1e-12)
    assert D[0, 1, 2] == pytest.approx(float(sp.diff(A12, w).subs(p)), rel=1e-12)
    assert D[1, 0, 2] == pytest.approx(-float(sp.diff(A12, w).subs(p)), rel=1e-12)


def test_field_jacobian_against_finite_differences(r3):
    p = np.array([0.3, 1.1, -0.4])
    J = hamiltonian_field_jacobian(r3.structure, r3.hamiltonian, p)
    h = 1e-6
    X = lambda q: hamiltonian_field_at(r3.structure, r3.hamiltonian, q).X
    fd = np.column_stack([(X(p + h * e) - X(p - h * e)) / (2 * h) for e in np.eye(3)])
    assert np.allclose(J, fd, rtol=1e-6, atol=1e-7)


def test_is_hamiltonian_field(r3):
    pts = r3_points(np.random.default_rng(3), 10)
    ok, _ = is_hamiltonian_field(r3.structure, VectorFieldExpr(["4*x1^2", "4*x1*x2", "x2^2"], 3), pts)
    assert ok == [True, True]
    ok, defects = is_hamiltonian_field(r3.structure, VectorFieldExpr(["x2", "0", "0"], 3), pts)
    assert ok != [True, True] and max(defects) > 1e-3


def test_derivation_and_bracket(r3):
    g = KFunction([ScalarField("-2*x3^2/x2^2", 3), ScalarField("-4*x3/x2^2", 3)])
    pts = r3_points(np.random.default_rng(4), 10)
    worst, ok = derivation_check(r3.structure, r3.hamiltonian, g, pts)
    assert ok and worst < 1e-9
    p = pts[0]
    Xh = hamiltonian_field_at(r3.structure, r3.hamiltonian, p).X
    assert np.allclose(bracket_k(r3.structure, r3.hamiltonian, g, p), -(g.grads(p) @ Xh), atol=1e-9)


def test_degenerate_family_is_rejected():
    P = structure([[["", "1", ""], ["", "", ""], ["", "", ""]]], 3)
    rep = verify_structure(P, [np.zeros(3)])
    assert not rep.passed and rep.points[0].joint_kernel_dim == 1


def test_non_closed_form_is_rejected():
    P = structure([[["", "x3", ""], ["", "", ""], ["", "", ""]], [["", "", "1"], ["", "", "1"], ["", "", ""]]], 3)
    rep = verify_structure(P, [np.array([0.1, 0.2, 0.3])])
    assert not rep.passed and rep.points[0].closure_defect > 0.5


def test_solve_residual_flags_non_hamiltonian_functions():
    P = structure([[["", "1"], ["", ""]], [["", "1"], ["", ""]]], 2)
    h = KFunction([ScalarField("x1", 2), ScalarField("x2", 2)])
    assert not hamiltonian_field_at(P, h, [0.0, 0.0]).accepted
    h = KFunction([ScalarField("x1", 2), ScalarField("x1", 2)])
    assert hamiltonian_field_at(P, h, [0.0, 0.0]).accepted
