import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from psmech import catalog
from psmech import subspace as sub
from psmech.reduction import (check_blacker, check_condition_A, check_condition_B, dynamics_reduction_check,
                              quotient_basis, reduce_at, reduction_report, reduced_structure_ranks)
from psmech.symmetry import isotropy_orbit, level_tangent


def level(name, count=20, seed=0, **params):
    S = catalog.load(name, **params)
    return S, S.sample_level(count, np.random.default_rng(seed))


TABLE = {
    # A per alpha, B, Blacker, (quotient dim, ranks, joint kernel)
    "counterexample-r4": ([True, False], True, False, (1, [0, 0], 1)),
    "example-r6": ([True, True], False, False, (3, [2, 2], 1)),
    "example-r7": ([False, True], True, True, (4, [2, 2], 0)),
    "product-symplectic": ([True, True], True, True, (4, [2, 2], 0)),
    "affine-lie": ([True, True], True, True, (2, [2, 2], 0)),
    "polynomial": ([True, True], True, True, (4, [2, 2], 0)),
}


@pytest.mark.parametrize("name", sorted(TABLE))
def test_truth_tables(name):
    A, B, bl, (dim, ranks, jk) = TABLE[name]
    S, pts = level(name)
    rep = reduction_report(S.structure, S.symmetry, pts)
    assert rep.condition_A == A
    assert rep.condition_B == B
    assert rep.blacker == bl
    assert rep.consistent
    for q in rep.points:
        assert (q.reduced_dim, q.reduced_ranks, q.reduced_joint_kernel_dim) == (dim, ranks, jk)


def test_r4_by_hand():
    # level tangent <d_x, d_z>; alpha = 2 level kernel <d_x, d_y, d_z> is too big
    S, pts = level("counterexample-r4", 1)
    p = pts[0]
    e = np.eye(4)
    L = level_tangent(S.structure, S.symmetry, p)
    assert sub.equals(L, sub.span([e[0], e[2]], 4))
    assert check_condition_A(S.structure, S.symmetry, p) == [True, False]
    assert check_condition_B(S.structure, S.symmetry, p)
    assert not check_blacker(S.structure, S.symmetry, p)


def test_integrable_reduces_to_the_last_pair():
    S, pts = level("integrable", 5, k=5)
    for p in pts:
        rr = reduced_structure_ranks(S.structure, S.symmetry, p)
        assert (rr.reduced_dim, rr.ranks, rr.joint_kernel_dim) == (2, [0, 0, 0, 0, 2], 0)


def test_quotient_is_complement_of_isotropy_orbit():
    S, pts = level("oscillators-cartesian", 3)
    for p in pts:
        L, Omu, Q = quotient_basis(S.structure, S.symmetry, p)
        assert Q.dim + Omu.dim == L.dim
        assert np.allclose(Omu.B.T @ Q.B, 0, atol=1e-12)
        assert sub.equals(Omu, isotropy_orbit(S.structure, S.symmetry, p))


@pytest.mark.parametrize("name", [n for n in catalog.ids() if n != "example-r3"])
def test_both_conditions_imply_blacker(name):
    S, pts = level(name, 10, seed=3)
    rep = reduction_report(S.structure, S.symmetry, pts)
    assert rep.consistent
    if all(rep.condition_A) and rep.condition_B:
        assert rep.blacker


def test_reduced_joint_kernel_tracks_blacker_pointwise():
    for name in ("counterexample-r4", "example-r6", "example-r7"):
        S, pts = level(name, 5)
        for p in pts:
            q = reduce_at(S.structure, S.symmetry, p)
            assert q.blacker == (q.reduced_joint_kernel_dim == 0)


@settings(max_examples=25, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_affine_dynamics_reduce_iff_no_x4_drift(c1, c2, c3, c5):
    S = catalog.load("affine-lie", c1=c1, c2=c2, c3=c3, c5=c5)
    pts = S.sample_level(4, np.random.default_rng(0))
    rep = dynamics_reduction_check(S.structure, S.symmetry, S.hamiltonian, pts)
    assert rep.passed == (abs(c1) < 1e-7 and abs(c2) < 1e-7)
    assert rep.invariance == pytest.approx(max(abs(c1), abs(c2)), abs=1e-12)


def test_dynamics_reduction_from_a_declared_field():
    S, pts = level("schwarz", 5)
    rep = dynamics_reduction_check(S.structure, S.symmetry, None, pts, field=S.vector_field)
    assert rep.passed and rep.commutation < 1e-9
    with pytest.raises(ValueError):
        dynamics_reduction_check(S.structure, S.symmetry, None, pts)
