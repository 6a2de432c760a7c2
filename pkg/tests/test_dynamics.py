import csv
import io

import numpy as np
import pytest

from psmech import catalog
from psmech.dynamics import (DomainExit, LyapunovCandidate, StepUnderflow, conservation_check, empirical_stability,
                             integrate, lyapunov_test)
from psmech.expr import ScalarField, VectorFieldExpr

ROTATION = VectorFieldExpr(["x2", "-x1"], 2)


class Above:
    def __init__(self, i, bound):
        self.i, self.bound = i, bound

    def holds(self, x):
        return x[self.i] > self.bound

    def __str__(self):
        return f"x{self.i + 1} > {self.bound}"


def test_rk45_and_rk4_agree_with_the_exact_rotation():
    x0 = [1.0, 0.0]
    T = 2.0
    exact = [np.cos(T), -np.sin(T)]
    a = integrate(ROTATION, x0, T)
    b = integrate(ROTATION, x0, T, method="rk4", dt=1e-3)
    assert a.times[-1] == T and b.times[-1] == pytest.approx(T)
    assert np.allclose(a.final, exact, atol=1e-8)
    assert np.allclose(b.final, exact, atol=1e-10)
    assert np.max(np.abs(a.final - b.final)) < 1e-6


def test_oscillator_factors_agree_across_methods():
    S = catalog.load("oscillators-cartesian")
    x0 = S.levels[0].seed
    a = integrate(S.field(), x0, 5.0)
    b = integrate(S.field(), x0, 5.0, method="rk4", dt=1e-3)
    assert np.max(np.abs(a.final - b.final)) < 1e-6


@pytest.mark.parametrize("name", ["oscillators-cartesian", "polynomial", "affine-lie"])
def test_time_reversal_returns_to_the_start(name):
    S = catalog.load(name)
    x0 = S.levels[0].seed
    there = integrate(S.field(), x0, 5.0).final
    back = integrate(S.field(), there, 0.0, t0=5.0).final
    assert np.max(np.abs(back - x0)) < 1e-6


def test_conservation_of_energies_and_momenta():
    S = catalog.load("oscillators-cartesian")
    traj = integrate(S.field(), S.levels[0].seed, 100.0)
    rep = conservation_check(traj, S.hamiltonian, S.symmetry)
    assert rep.passed and set(rep.drifts) == {"h1", "h2"} | {f"J{a}_{i}" for a in (1, 2) for i in range(1, 7)}
    bad = conservation_check(traj, extra={"q": ScalarField("x1", S.n)})
    assert not bad.passed and bad.drifts["q"] > 0.1


def test_polynomial_conservation_on_a_long_run():
    S = catalog.load("polynomial")
    traj = integrate(S.field(), [0.1, 0.2, 0.3, -0.2, 0.4, 0.5, 0.1, -0.3], 100.0)
    assert conservation_check(traj, S.hamiltonian, S.symmetry).passed


def test_domain_exit_and_blow_up():
    with pytest.raises(DomainExit) as exc:
        integrate(VectorFieldExpr(["-1"], 1), [1.0], 5.0, domain=[Above(0, 0.0)])
    assert exc.value.t == pytest.approx(1.0, abs=0.1) and "x1 > 0" in str(exc.value)
    with pytest.raises(DomainExit):
        integrate(VectorFieldExpr(["-1"], 1), [1.0], 5.0, method="rk4", domain=[Above(0, 0.0)])
    with pytest.raises(DomainExit):
        integrate(ROTATION, [-1.0, 0.0], 1.0, domain=[Above(0, 0.0)])
    with pytest.raises(StepUnderflow):
        integrate(VectorFieldExpr(["x1^2"], 1), [1.0], 2.0)
    with pytest.raises(ValueError):
        integrate(ROTATION, [1.0, 0.0], 1.0, method="euler")


def test_stop_callback_ends_the_run():
    traj = integrate(ROTATION, [1.0, 0.0], 10.0, stop=lambda x: x[0] < 0)
    assert traj.stopped_early and traj.times[-1] < 10.0 and traj.final[0] < 0


def test_csv_output():
    traj = integrate(ROTATION, [1.0, 0.0], 0.5, method="rk4", dt=0.1)
    rows = list(csv.reader(io.StringIO(traj.to_csv())))
    assert rows[0] == ["t", "x1", "x2"]
    assert len(rows) == 7
    assert float(rows[1][1]) == 1.0 and float(rows[-1][0]) == pytest.approx(0.5)


def test_lyapunov_accepts_energy_and_rejects_bad_candidates():
    rng = np.random.default_rng(0)
    damped = VectorFieldExpr(["x2", "-x1 - x2"], 2)
    energy = LyapunovCandidate(ScalarField("(x1^2 + x2^2)/2", 2), np.zeros(2))
    assert lyapunov_test(damped, energy, 0.5, 300, rng).passed
    anti = VectorFieldExpr(["x2", "-x1 + x2"], 2)
    rep = lyapunov_test(anti, energy, 0.5, 300, rng)
    assert not rep.passed and rep.max_derivative > 0
    shifted = LyapunovCandidate(ScalarField("x1^2 + x2^2 + 1", 2), np.zeros(2))
    assert "vanish" in lyapunov_test(damped, shifted, 0.5, 50, rng).reason
    indefinite = LyapunovCandidate(ScalarField("x1^2 - x2^2", 2), np.zeros(2))
    assert lyapunov_test(ROTATION, indefinite, 0.5, 50, rng).reason == "positivity fails"


def test_empirical_stability_labels():
    rng = np.random.default_rng(0)
    rep = empirical_stability(ROTATION, [0.0, 0.0], 0.1, 0.01, 50.0, 5, rng)
    assert rep.stable and rep.worst_excursion < 0.011 and rep.label.startswith("empirical")
    saddle = VectorFieldExpr(["x1", "-x2"], 2)
    rep = empirical_stability(saddle, [0.0, 0.0], 0.1, 0.01, 50.0, 5, rng)
    assert rep.verdict == "instability-detected" and rep.worst_excursion > 0.1
    # only the monitored coordinate counts
    shear = VectorFieldExpr(["x2", "0"], 2)
    rep = empirical_stability(shear, [0.0, 0.0], 0.1, 0.01, 50.0, 5, rng, monitors=lambda x: x[1:])
    assert rep.stable
