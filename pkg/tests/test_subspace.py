import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from psmech import subspace as sub
from psmech.subspace import Definiteness, ToleranceConfig


def rand_space(rng, n, d):
    return sub.span(rng.standard_normal((n, d)), n)


def test_span_rank_and_nullspace():
    M = np.array([[1.0, 2, 3], [2, 4, 6], [0, 1, 1]])
    assert sub.rank(M) == 2
    N = sub.nullspace(M)
    assert N.dim == 1
    assert np.allclose(M @ N.B, 0)
    assert sub.span([[1, 0, 0], [2, 0, 0]], 3).dim == 1
    assert sub.span([], 3).dim == 0


def test_abs_floor_treats_tiny_matrices_as_zero():
    assert sub.rank(np.array([[1e-15, 0], [0, 0]])) == 0
    assert sub.rank(np.array([[1e-3, 0], [0, 0]])) == 1


def test_intersection_and_sum_of_coordinate_planes():
    e = np.eye(4)
    U = sub.span([e[0], e[1]], 4)
    V = sub.span([e[1], e[2]], 4)
    assert sub.intersect(U, V).dim == 1
    assert sub.contains(sub.intersect(U, V), e[1])
    assert sub.sum_(U, V).dim == 3
    assert sub.equals(sub.intersect(U, sub.zero(4)), sub.zero(4))
    assert sub.equals(sub.sum_(U, sub.whole(4)), sub.whole(4))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 8), st.data())
def test_dimension_formula(n, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2 ** 31)))
    a = data.draw(st.integers(0, n))
    b = data.draw(st.integers(0, n))
    shared = data.draw(st.integers(0, min(a, b)))
    C = rng.standard_normal((n, shared))
    U = sub.span(np.hstack([C, rng.standard_normal((n, a - shared))]), n)
    V = sub.span(np.hstack([C, rng.standard_normal((n, b - shared))]), n)
    assert sub.sum_(U, V).dim + sub.intersect(U, V).dim == U.dim + V.dim
    assert sub.is_subset(sub.intersect(U, V), U) and sub.is_subset(sub.intersect(U, V), V)
    assert sub.is_subset(U, sub.sum_(U, V))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 7), st.data())
def test_orth_complement_within(n, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2 ** 31)))
    L = rand_space(rng, n, data.draw(st.integers(1, n)))
    W = sub.span(L.B @ rng.standard_normal((L.dim, data.draw(st.integers(0, L.dim)))), n)
    Q = sub.orth_complement_within(W, L)
    assert Q.dim + W.dim == L.dim
    assert np.allclose(W.B.T @ Q.B, 0, atol=1e-12)
    assert sub.equals(sub.sum_(Q, W), L)


def _random_form(rng, n):
    A = rng.standard_normal((n, n))
    return A - A.T


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.data())
def test_k_orthogonal_complement(n, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2 ** 31)))
    forms = [_random_form(rng, n) for _ in range(data.draw(st.integers(1, 3)))]
    W = rand_space(rng, n, data.draw(st.integers(0, n)))
    C = sub.k_orth_complement(W, forms)
    for A in forms:
        assert np.allclose(W.B.T @ A @ C.B, 0, atol=1e-10)
    # the complement of a larger space is smaller
    W2 = sub.sum_(W, rand_space(rng, n, 1))
    assert sub.is_subset(sub.k_orth_complement(W2, forms), C)


def test_k_orth_complement_rejects_non_skew():
    with pytest.raises(ValueError):
        sub.k_orth_complement(sub.whole(2), [np.eye(2)])


def test_projection_residual():
    U = sub.span([[1, 0, 0]], 3)
    V = sub.span([[1, 1e-3, 0]], 3)
    assert 0 < sub.residual(V, U) < 2e-3
    assert not sub.equals(U, V)
    assert sub.equals(U, V, ToleranceConfig(eq_tol=1e-2))


@pytest.mark.parametrize("H, verdict", [
    (np.diag([1.0, 2.0]), Definiteness.PositiveDefinite),
    (np.diag([-1.0, -2.0]), Definiteness.NegativeDefinite),
    (np.diag([1.0, 0.0]), Definiteness.PositiveSemidefinite),
    (np.diag([-1.0, 0.0]), Definiteness.NegativeSemidefinite),
    (np.diag([1.0, -1.0]), Definiteness.Indefinite),
    (np.zeros((2, 2)), Definiteness.Zero),
])
def test_definiteness(H, verdict):
    assert sub.definiteness(H) == verdict


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (4, 4), elements=st.floats(-3, 3)))
def test_gram_matrices_are_never_negative(M):
    v = sub.definiteness(M @ M.T)
    assert v in (Definiteness.PositiveDefinite, Definiteness.PositiveSemidefinite, Definiteness.Zero)


def test_tolerance_config_from_env():
    cfg = ToleranceConfig.from_env({"PSMECH_TOL_RANK": "1e-6"})
    assert cfg.rank_rel == 1e-6
    with pytest.raises(ValueError):
        ToleranceConfig(rank_rel=0)
