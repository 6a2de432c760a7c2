"""Integration, conservation checks and Lyapunov / empirical stability tests."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import RK45

from .expr import DomainError

RTOL = 1e-9
ATOL = 1e-12
DRIFT_TOL = 1e-6
LYAP_TOL = 1e-9


class DomainExit(RuntimeError):
    def __init__(self, t, x, why):
        self.t = t
        self.x = x
        super().__init__(f"left the domain at t={t:.6g}: {why}")


class StepUnderflow(RuntimeError):
    pass


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    method: str
    meta: dict = field(default_factory=dict)
    stopped_early: bool = False

    @property
    def final(self):
        return self.states[-1]

    def to_csv(self, out=None) -> str:
        n = self.states.shape[1]
        buf = io.StringIO()
        buf.write(",".join(["t"] + [f"x{i + 1}" for i in range(n)]) + "\n")
        for t, x in zip(self.times, self.states):
            buf.write(",".join(f"{v:.17g}" for v in (t, *x)) + "\n")
        text = buf.getvalue()
        if out is not None:
            out.write(text)
        return text


def _rhs(X):
    f = X.value if hasattr(X, "value") else X
    return lambda t, y: np.asarray(f(y), dtype=float)


def _violated(domain, x):
    for pred in domain or ():
        if not pred.holds(x):
            return str(pred)
    return None


def _locate_exit(sol, domain, lo, hi, iters=60):
    # bisect the step's interpolant for the first state outside the domain
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if _violated(domain, sol(mid)):
            hi = mid
        else:
            lo = mid
    return hi, sol(hi)


def integrate(X, x0, t_final, method="rk45", dt=None, rtol=RTOL, atol=ATOL,
              domain=None, t0=0.0, stop=None) -> Trajectory:
    """Integrate dx/dt = X(x) from t0 to t_final.

    ``domain`` is a list of predicates with ``holds(x)``; ``stop(x)`` may end
    the run early (the trajectory is then flagged ``stopped_early``).
    """
    x0 = np.asarray(x0, dtype=float)
    f = _rhs(X)
    why = _violated(domain, x0)
    if why:
        raise DomainExit(t0, x0, why)
    ts, xs = [t0], [x0.copy()]
    early = False
    if method == "rk4":
        if dt is None:
            dt = (t_final - t0) / 1000.0
        dt = math.copysign(abs(dt), t_final - t0)
        steps = max(1, int(math.ceil((t_final - t0) / dt - 1e-12)))
        t, x = t0, x0.copy()
        for s in range(steps):
            hstep = (t_final - t) if s == steps - 1 else dt
            try:
                k1 = f(t, x)
                k2 = f(t + hstep / 2, x + hstep / 2 * k1)
                k3 = f(t + hstep / 2, x + hstep / 2 * k2)
                k4 = f(t + hstep, x + hstep * k3)
            except DomainError as exc:
                raise DomainExit(t, x, str(exc)) from None
            x = x + hstep / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t = t0 + (s + 1) * dt if s < steps - 1 else t_final
            if not np.all(np.isfinite(x)):
                raise StepUnderflow(f"non-finite state at t={t:.6g}")
            why = _violated(domain, x)
            if why:
                raise DomainExit(t, x, why)
            ts.append(t)
            xs.append(x.copy())
            if stop is not None and stop(x):
                early = True
                break
        meta = {"dt": abs(dt)}
    elif method == "rk45":
        if t_final == t0:
            return Trajectory(np.array(ts), np.array(xs), method, {"rtol": rtol, "atol": atol})
        try:
            solver = RK45(f, t0, x0, t_final, rtol=rtol, atol=atol)
            while solver.status == "running":
                solver.step()
                if solver.status == "failed":
                    raise StepUnderflow(f"step size underflow at t={solver.t:.6g}")
                x = solver.y.copy()
                if not np.all(np.isfinite(x)):
                    raise StepUnderflow(f"non-finite state at t={solver.t:.6g}")
                why = _violated(domain, x)
                if why:
                    t_exit, x = _locate_exit(solver.dense_output(), domain, solver.t_old, solver.t)
                    raise DomainExit(t_exit, x, why)
                ts.append(solver.t)
                xs.append(x)
                if stop is not None and stop(x):
                    early = True
                    break
        except DomainError as exc:
            raise DomainExit(ts[-1], xs[-1], str(exc)) from None
        meta = {"rtol": rtol, "atol": atol}
    else:
        raise ValueError(f"unknown method {method!r} (use rk45 or rk4)")
    return Trajectory(np.array(ts), np.array(xs), method, meta, early)


@dataclass
class ConservationReport:
    drifts: dict
    passed: bool

    def as_dict(self):
        return {"drifts": self.drifts, "passed": self.passed, "tolerance": DRIFT_TOL}


def conservation_check(traj: Trajectory, h=None, S=None, extra=None, tol=DRIFT_TOL) -> ConservationReport:
    """Max relative drift |q(x(t)) - q(x0)| / max(1, |q(x0)|) of each quantity.

    Quantities are the components of the k-function ``h``, the explicit
    momentum components of ``S`` and any ``extra`` name -> field entries.
    """
    qs = {}
    if h is not None:
        for a, c in enumerate(h.components):
            qs[f"h{a + 1}"] = c
    if S is not None and S.momentum is not None:
        for a, row in enumerate(S.momentum):
            for i, J in enumerate(row):
                qs[f"J{a + 1}_{i + 1}"] = J
    qs.update(extra or {})
    drifts = {}
    for name, q in qs.items():
        vals = np.array([q.value(x) for x in traj.states])
        drifts[name] = float(np.max(np.abs(vals - vals[0])) / max(1.0, abs(vals[0])))
    return ConservationReport(drifts, all(d < tol for d in drifts.values()))


def _ball(rng, center, radius, count):
    n = len(center)
    d = rng.standard_normal((count, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = radius * rng.uniform(0.0, 1.0, count) ** (1.0 / n)
    return center + d * r[:, None]


@dataclass
class LyapunovCandidate:
    M: object  # scalar field with value() and grad()
    center: np.ndarray


@dataclass
class LyapunovReport:
    passed: bool
    center_value: float
    min_value: float
    max_derivative: float
    worst_point: list | None
    reason: str = ""

    def as_dict(self):
        return dict(vars(self))


def lyapunov_test(X, cand: LyapunovCandidate, radius, samples, rng, tol=LYAP_TOL) -> LyapunovReport:
    """Sample the ball: M(x_e) ~ 0, M > 0 away from x_e and X . grad M <= tol."""
    c = np.asarray(cand.center, dtype=float)
    f = X.value if hasattr(X, "value") else X
    m0 = cand.M.value(c)
    pts = _ball(rng, c, radius, samples)
    min_val, max_dot, worst, reason = np.inf, -np.inf, None, ""
    for x in pts:
        if np.linalg.norm(x - c) < 1e-12:
            continue
        m = cand.M.value(x)
        dot = float(np.dot(cand.M.grad(x), f(x)))
        if m < min_val:
            min_val = m
            if m <= 0 and not reason:
                worst, reason = x.tolist(), "positivity fails"
        if dot > max_dot:
            max_dot = dot
            if dot > tol and not reason:
                worst, reason = x.tolist(), "derivative along the flow is positive"
    if abs(m0) >= tol and not reason:
        reason = "candidate does not vanish at the center"
    ok = not reason
    return LyapunovReport(ok, float(m0), float(min_val), float(max_dot), worst, reason)


@dataclass
class EmpiricalReport:
    verdict: str
    worst_excursion: float
    epsilon: float
    delta: float
    horizon: float
    samples: int
    errors: list
    label: str = "empirical, finite-horizon"

    @property
    def stable(self) -> bool:
        return self.verdict == "stable-at-scale"

    def as_dict(self):
        return dict(vars(self))


def empirical_stability(X, x_e, eps, delta, T, n_samples, rng, monitors=None,
                        method="rk45", dt=None, domain=None) -> EmpiricalReport:
    """Integrate from points of the delta-ball and watch the monitored excursion.

    ``monitors`` maps a state to the observed coordinates (default: the state).
    Only "no instability detected up to T" can be concluded.
    """
    x_e = np.asarray(x_e, dtype=float)
    mon = monitors or (lambda x: x)
    ref = np.asarray(mon(x_e), dtype=float)
    worst, errors = 0.0, []
    for x0 in _ball(rng, x_e, delta, n_samples):
        state = {"worst": 0.0}

        def watch(x):
            e = float(np.linalg.norm(np.asarray(mon(x)) - ref))
            state["worst"] = max(state["worst"], e)
            return e > eps

        watch(x0)
        try:
            integrate(X, x0, T, method=method, dt=dt, domain=domain, stop=watch)
        except (DomainExit, StepUnderflow) as exc:
            errors.append(str(exc))
            state["worst"] = max(state["worst"], np.inf)
        worst = max(worst, state["worst"])
    verdict = "stable-at-scale" if worst < eps else "instability-detected"
    return EmpiricalReport(verdict, worst, eps, delta, T, n_samples, errors)
