import itertools

import numpy as np
import pytest

from psmech import catalog
from psmech.equilibrium import (NoConvergence, Verdict, classify_formal_stability, find_relative_equilibria,
                                gauge_degeneracy_check, h_xi_gradients, h_xi_hessians, reduced_minimum_check,
                                relative_equilibrium_at, solve_from_seed, theorem_equivalence)
from psmech.subspace import Definiteness
from psmech.system import System


def parts(S):
    return S.structure, S.symmetry, S.hamiltonian


@pytest.fixture(scope="module")
def osc3():
    return catalog.load("oscillators", k=3, b=[0.5, 1.0, 2.0])


def test_seeds_converge_to_circular_orbits(osc3):
    P, S, h = parts(osc3)
    found = find_relative_equilibria(P, S, h, osc3.seeds)
    assert found.equilibria and not found.failures
    for e in found.equilibria:
        assert e.accepted and e.residual < 1e-10
        for a, b in enumerate([0.5, 1.0, 2.0]):
            r, th, ph, pr, pth, pph = e.z[6 * a:6 * a + 6]
            assert abs(pr) < 1e-9 and abs(pth) < 1e-9
            assert abs(th - np.pi / 2) < 1e-9
            assert abs(pph - b * r * r) < 1e-8
            assert e.xi[3 * a] == pytest.approx(pph / r ** 2, abs=1e-8)
            assert np.allclose(e.xi[3 * a + 1:3 * a + 3], 0, atol=1e-8)
        assert e.xi_in_isotropy


def test_spectra_of_circular_orbits(osc3):
    P, S, h = parts(osc3)
    for e in find_relative_equilibria(P, S, h, osc3.seeds).equilibria:
        rep = classify_formal_stability(P, S, h, e)
        assert rep.classification == Verdict.FormallyStable and rep.spanning
        for blk, b in zip(rep.blocks, [0.5, 1.0, 2.0]):
            assert np.allclose(sorted(blk.spectrum), sorted([1.0, 4 * b * b]), atol=1e-6)
        assert reduced_minimum_check(P, S, h, e)[0] == Definiteness.PositiveDefinite
        assert gauge_degeneracy_check(P, S, h, e).passed


def test_h_xi_derivatives_against_finite_differences(osc3):
    P, S, h = parts(osc3)
    z = np.array(osc3.seeds[1])
    xi = np.random.default_rng(0).standard_normal(S.g)
    H = h_xi_hessians(P, S, h, z, xi)
    eps = 1e-6
    for a in range(3):
        fd = np.column_stack([(h_xi_gradients(P, S, h, z + eps * e, xi)[a] - h_xi_gradients(P, S, h, z - eps * e, xi)[a])
                              / (2 * eps) for e in np.eye(P.n)])
        assert np.allclose(H[a], fd, atol=1e-6)


def _no_equilibrium_plane():
    # X_h = -d/dy, the only symmetry is d/dx: X_h never lies along the orbit
    doc = {"name": "drift", "dimension": 2, "k": 1, "forms": [[["", "1"], ["", ""]]], "hamiltonian": ["x1"],
           "symmetry": {"generators": [["1", "0"]], "momentum": [["x2"]], "structure_constants": [[[0]]]}}
    return System(doc)


def test_no_convergence_is_reported():
    S = _no_equilibrium_plane()
    with pytest.raises(NoConvergence):
        solve_from_seed(*parts(S), [0.2, 0.3])
    found = find_relative_equilibria(*parts(S), [[0.0, 0.0], [1.0, 1.0]])
    assert not found.equilibria and len(found.failures) == 2
    assert not relative_equilibrium_at(*parts(S), [0.0, 0.0]).accepted


def test_search_drops_duplicates_and_out_of_domain_hits(osc3):
    P, S, h = parts(osc3)
    seeds = [osc3.seeds[0], osc3.seeds[0]]
    assert len(find_relative_equilibria(P, S, h, seeds).equilibria) == 1
    found = find_relative_equilibria(P, S, h, seeds, accept=lambda z: False)
    assert not found.equilibria and found.failures[0][1] == "converged outside the domain"


def test_equivalence_at_and_away_from_equilibria(osc3):
    P, S, h = parts(osc3)
    e = find_relative_equilibria(P, S, h, osc3.seeds[:1]).equilibria[0]
    at = theorem_equivalence(P, S, h, e.z)
    assert at.agree and at.residual_zero and at.gradients_zero
    for p in osc3.sample_points(20, np.random.default_rng(1)):
        assert theorem_equivalence(P, S, h, p).agree


def test_quantum_family_is_semidefinite():
    Q = catalog.load("quantum-quadratic")
    P, S, h = parts(Q)
    found = find_relative_equilibria(P, S, h, Q.seeds)
    assert found.equilibria
    for e in found.equilibria:
        assert abs(e.z[3]) < 1e-9 and e.xi[0] == pytest.approx(1.0)
        rep = classify_formal_stability(P, S, h, e)
        assert rep.classification == Verdict.Inconclusive
        assert {b.verdict for b in rep.blocks if b.basis.shape[1]} <= {Definiteness.PositiveSemidefinite,
                                                                       Definiteness.PositiveDefinite}
        assert reduced_minimum_check(P, S, h, e)[0] == Definiteness.PositiveSemidefinite


@pytest.mark.parametrize("b, c, d, e", list(itertools.product([1, 2, 3], repeat=4)))
def test_polynomial_exponent_grid(b, c, d, e):
    Y = catalog.load("polynomial", a=1, b=b, c=c, d=d, e=e)
    P, S, h = parts(Y)
    z = np.array(Y.to_dict()["family"][0], float)
    eq = relative_equilibrium_at(P, S, h, z, Y.vector_field)
    assert eq.accepted and np.allclose(eq.xi, [z[5], 0, 0])
    rep = classify_formal_stability(P, S, h, eq)
    # on the family, the blocks are the Hessians of x3^(c+1)/(c+1) + x4^(b+1)/(b+1) in (x3, x4)
    # and x8^(d+1)/(d+1) + x7^(e+1)/(e+1) in (x7, x8): entry 1 for exponent 1, else 0
    blocks = [sorted([float(c == 1), float(b == 1)]), sorted([float(e == 1), float(d == 1)])]
    for blk, want in zip(rep.blocks, blocks):
        assert np.allclose(sorted(blk.spectrum), want, atol=1e-9)
    if all(min(w) == 1 for w in blocks):
        want = Verdict.FormallyStable
    elif any(max(w) == 0 for w in blocks):
        want = Verdict.NotFormallyStable
    else:
        want = Verdict.Inconclusive
    assert rep.classification == want
    assert rep.classification.value == catalog.polynomial_verdict(b, c, d, e)
