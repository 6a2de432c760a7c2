"""Built-in example systems with their expected-results tables.

Every entry is a builder returning a system document (the same JSON format
the CLI loads), so export and reload give the same claims by construction.
Each claim records ``source``: "reference" for results stated with the example,
"derived" for values worked out by hand from the stated data.
"""

from __future__ import annotations

import copy
import math

from .system import System

_ENTRIES = {}


class UnknownEntry(KeyError):
    pass


def entry(name, defaults, summary):
    def deco(fn):
        _ENTRIES[name] = (fn, dict(defaults), summary)
        return fn
    return deco


def ids():
    return list(_ENTRIES)


def describe():
    return [{"id": k, "defaults": d, "summary": s} for k, (_, d, s) in _ENTRIES.items()]


def defaults(name):
    if name not in _ENTRIES:
        raise UnknownEntry(name)
    return copy.deepcopy(_ENTRIES[name][1])


def document(name, **params) -> dict:
    if name not in _ENTRIES:
        raise UnknownEntry(name)
    fn, dflt, _ = _ENTRIES[name]
    unknown = set(params) - set(dflt)
    if unknown:
        raise ValueError(f"unknown parameter(s) for {name}: {', '.join(sorted(unknown))}")
    merged = {**dflt, **params}
    doc = fn(**merged)
    doc["catalog"] = {"id": name, "params": merged}
    doc.setdefault("schema", "psmech.system/1")
    return doc


def load(name, **params) -> System:
    return System(document(name, **params))


# ---------------------------------------------------------------------------
# helpers

def wedge(n, *terms):
    """Upper-triangle matrix of sum coef * dx_i ^ dx_j (1-based i, j)."""
    M = [[""] * n for _ in range(n)]
    for coef, i, j in terms:
        i, j = i - 1, j - 1
        if i > j:
            i, j, coef = j, i, f"-({coef})"
        cur = M[i][j]
        M[i][j] = f"{cur} + ({coef})" if cur else str(coef)
    return M


def unit(n, *idx):
    v = [0.0] * n
    for i in idx:
        sign = -1.0 if i < 0 else 1.0
        v[abs(i) - 1] += sign
    return v


def claim(cid, kind, expected, source="reference", note="", **args):
    return {"id": cid, "kind": kind, "args": args, "expected": expected, "source": source, "note": note}


def reduction_claims(A, B, blacker, ranks=None, source_blacker="reference", source_ranks="reference"):
    out = [claim("condition-A", "condition_A", A), claim("condition-B", "condition_B", B)]
    if blacker is not None:
        out.append(claim("blacker", "blacker", blacker, source_blacker))
    if ranks is not None:
        out.append(claim("reduced-ranks", "reduced_ranks", ranks, source_ranks))
    return out


def _num(x):
    return repr(float(x)) if not float(x).is_integer() else str(int(x))


# ---------------------------------------------------------------------------
# entries

@entry("example-r3", {}, "two-polysymplectic form on R^3 with two Hamiltonian fields (v != 0)")
def _example_r3():
    n = 3
    w1 = wedge(n, ("-4*w/v^2", 1, 3), ("1/v", 2, 3), ("4*w^2/v^3", 1, 2))
    w2 = wedge(n, ("-4/v^2", 1, 3), ("8*w/v^3", 1, 2))
    f = ["4*u*w - 8*u^2*w^2/v^2 - v^2/2", "4*u - 16*u^2*w/v^2"]
    g = ["-2*w^2/v^2", "-4*w/v^2"]
    X1 = ["4*u^2", "4*u*v", "v^2"]
    X2 = ["1", "0", "0"]
    return {
        "name": "example-r3", "dimension": n, "k": 2, "coordinates": ["u", "v", "w"],
        "forms": [w1, w2], "hamiltonian": f, "domain": ["v != 0"],
        "box": [[-1, 1], [0.5, 2], [-1, 1]],
        "claims": [
            claim("structure", "structure_valid", True),
            claim("f-value", "value", 0.0, "derived", "f^1 at (1,2,1)", expr=f[0], at=[1, 2, 1]),
            claim("solve-f", "hamiltonian_solve", True, hamiltonian=f, field=X1),
            claim("solve-g", "hamiltonian_solve", True, hamiltonian=g, field=X2),
            claim("X2-hamiltonian", "is_hamiltonian_field", [True, True], field=X2),
            claim("X1-hamiltonian", "is_hamiltonian_field", [True, True], field=X1),
            claim("derivation", "derivation", True, "derived", h=f, f=g),
        ],
    }


@entry("counterexample-r4", {}, "condition B holds, condition A fails and no reduction exists (R^4)")
def _counterexample_r4():
    n = 4
    return {
        "name": "counterexample-r4", "dimension": n, "k": 2, "coordinates": ["x", "y", "z", "t"],
        "forms": [wedge(n, (1, 1, 2)), wedge(n, (1, 1, 4), (1, 2, 3))],
        "symmetry": {"generators": [["1", "0", "0", "0"]], "momentum": [["y"], ["t"]],
                     "structure_constants": [[[0]]]},
        "levels": [{"seed": [0.3, 0.7, -0.2, 0.5]}],
        "claims": [
            claim("structure", "structure_valid", True),
            claim("kernel-1", "kernel", [unit(n, 3), unit(n, 4)], alpha=1),
            claim("kernel-2", "kernel", [], alpha=2),
            claim("momentum", "momentum_valid", True),
            claim("cocycle", "cocycle", {"passed": True, "equivariant": True}),
            claim("level-tangent", "level_tangent", [unit(n, 1), unit(n, 3)]),
            claim("isotropy", "isotropy_dim", 1, alpha="joint"),
            claim("lemma", "lemma", [True, True], "derived"),
            *reduction_claims([True, False], True, False,
                              {"reduced_dim": 1, "ranks": [0, 0], "joint_kernel_dim": 1},
                              source_blacker="derived"),
        ],
    }


@entry("example-r6", {}, "condition A holds while condition B fails (R^6)")
def _example_r6():
    n = 6
    return {
        "name": "example-r6", "dimension": n, "k": 2,
        "forms": [wedge(n, (1, 1, 2), (1, 5, 6)), wedge(n, (1, 3, 4), (1, 5, 6))],
        "symmetry": {"generators": [["1", "0", "1", "0", "0", "0"]], "momentum": [["x2"], ["x4"]],
                     "structure_constants": [[[0]]]},
        "levels": [{"seed": [0.1, 0.6, -0.3, 0.8, 0.2, -0.5]}],
        "claims": [
            claim("structure", "structure_valid", True),
            claim("kernel-1", "kernel", [unit(n, 3), unit(n, 4)], alpha=1),
            claim("kernel-2", "kernel", [unit(n, 1), unit(n, 2)], alpha=2),
            claim("momentum", "momentum_valid", True),
            claim("level-tangent", "level_tangent", [unit(n, 1), unit(n, 3), unit(n, 5), unit(n, 6)]),
            claim("lemma", "lemma", [True, True], "derived"),
            *reduction_claims([True, True], False, False,
                              {"reduced_dim": 3, "ranks": [2, 2], "joint_kernel_dim": 1},
                              source_blacker="derived", source_ranks="derived"),
        ],
    }


@entry("example-r7", {}, "reduction exists although condition A fails (R^7)")
def _example_r7():
    n = 7
    return {
        "name": "example-r7", "dimension": n, "k": 2,
        "forms": [wedge(n, (1, 1, 2), (1, 5, 7), (1, 3, 6)), wedge(n, (1, 3, 4), (1, 5, 6))],
        "symmetry": {"generators": [unit(n, 5)], "momentum": [["x7"], ["x6"]],
                     "structure_constants": [[[0]]]},
        "levels": [{"seed": [0.2, -0.4, 0.5, 0.1, 0.3, -0.6, 0.7]}],
        "claims": [
            claim("structure", "structure_valid", True),
            claim("kernel-1", "kernel", [unit(n, 4)], alpha=1),
            claim("kernel-2", "kernel", [unit(n, 1), unit(n, 2), unit(n, 7)], alpha=2),
            claim("momentum", "momentum_valid", True),
            claim("level-tangent", "level_tangent", [unit(n, i) for i in range(1, 6)]),
            claim("lemma", "lemma", [True, True], "derived"),
            *reduction_claims([False, True], True, True,
                              {"reduced_dim": 4, "ranks": [2, 2], "joint_kernel_dim": 0}),
        ],
    }


@entry("integrable", {"k": 4}, "separable integrable system on R^2k with no regular momentum values (k > 3)")
def _integrable(k):
    k = int(k)
    if k < 2:
        raise ValueError("integrable needs k >= 2")
    n = 2 * k
    coords = []
    for a in range(1, k + 1):
        coords += [f"th{a}", f"I{a}"]
    forms = [wedge(n, (1, 2 * a - 1, 2 * a)) for a in range(1, k + 1)]
    gens = [unit(n, 2 * i - 1) for i in range(1, k)]
    J = [[f"I{a}" if a == i else "0" for i in range(1, k)] for a in range(1, k + 1)]
    h = [f"I{a}^2/2" for a in range(1, k + 1)]
    g = k - 1
    seed = []
    for a in range(1, k + 1):
        seed += [0.1 * a, 0.5 + 0.1 * a]
    return {
        "name": "integrable", "dimension": n, "k": k, "coordinates": coords,
        "forms": forms, "hamiltonian": h,
        "symmetry": {"generators": gens, "momentum": J, "structure_constants": [[[0] * g] * g] * g},
        "levels": [{"seed": seed}],
        "claims": [
            claim("structure", "structure_valid", True),
            claim("momentum", "momentum_valid", True),
            claim("cocycle", "cocycle", {"passed": True, "equivariant": True}),
            claim("weak-regularity", "weak_regularity",
                  {"verdict": "WeaklyRegular", "rank": k - 1, "regular": False,
                   "codomain_exceeds_domain": k > 3}),
            claim("level-dim", "level_dim", k + 1),
            claim("lemma", "lemma", [True, True], "derived"),
            *reduction_claims([True] * k, True, True,
                              {"reduced_dim": 2, "ranks": [0] * (k - 1) + [2], "joint_kernel_dim": 0},
                              source_blacker="derived"),
            claim("dynamics-reduction", "dynamics_reduction", True),
        ],
    }


@entry("product-symplectic", {}, "product of two symplectic planes-squared: rotation on one factor, translation on the other")
def _product_symplectic():
    n = 8
    coords = ["q11", "q12", "p11", "p12", "q21", "q22", "p21", "p22"]
    forms = [wedge(n, (1, 1, 3), (1, 2, 4)), wedge(n, (1, 5, 7), (1, 6, 8))]
    rot = ["-q12", "q11", "-p12", "p11", "0", "0", "0", "0"]
    tr = unit(n, 5)
    J = [["q11*p12 - q12*p11", "0"], ["0", "p21"]]
    h = ["(p11^2 + p12^2 + q11^2 + q12^2)/2", "(p21^2 + p22^2)/2 + q22^2/2"]
    seeds = [[1.02, 0.03, -0.02, 0.97, 0.3, 0.05, 0.5, -0.04],
             [0.0, 0.8, -0.83, 0.02, -0.2, -0.03, 0.7, 0.05]]
    return {
        "name": "product-symplectic", "dimension": n, "k": 2, "coordinates": coords,
        "forms": forms, "hamiltonian": h,
        "symmetry": {"generators": [rot, tr], "momentum": J, "structure_constants": [[[0, 0], [0, 0]]] * 2},
        "levels": [{"seed": [1.0, 0.0, 0.0, 1.0, 0.3, 0.2, 0.5, -0.4]}],
        "seeds": seeds,
        "claims": [
            claim("structure", "structure_valid", True),
            claim("momentum", "momentum_valid", True),
            claim("cocycle", "cocycle", {"passed": True, "equivariant": True}),
            claim("invariance", "invariance", True),
            claim("lemma", "lemma", [True, True], "derived"),
            *reduction_claims([True, True], True, True,
                              {"reduced_dim": 4, "ranks": [2, 2], "joint_kernel_dim": 0}, "derived", "derived"),
            claim("dynamics-reduction", "dynamics_reduction", True),
            claim("equilibria", "equilibria", True, "derived",
                  constraints=["q11*p11 + q12*p12", "p11^2 + p12^2 - q11^2 - q12^2", "p22", "q22"],
                  xi=["(q11*p12 - q12*p11)/(q11^2 + q12^2)", "p21"]),
            claim("classification", "classification", "FormallyStable", "derived"),
            claim("gauge", "gauge", True, "derived"),
            claim("equivalence", "theorem_equivalence", True, "derived"),
        ],
    }


def _osc_names(k):
    return [[f"r{a}", f"th{a}", f"ph{a}", f"pr{a}", f"pth{a}", f"pph{a}"] for a in range(1, k + 1)]


def _osc_params(k, b):
    b = [float(v) for v in (b if isinstance(b, (list, tuple)) else [b])]
    if len(b) == 1:
        b = b * int(k)
    if len(b) != int(k):
        raise ValueError(f"oscillators: expected {k} frequencies, got {len(b)}")
    if any(v <= 0 for v in b):
        raise ValueError("oscillators: frequencies must be positive")
    return int(k), b


def _so3_constants(k):
    # [xi_i, xi_j] = c^l_ij xi_l with generator order (L_z, L_x, L_y) per factor
    g = 3 * k
    c = [[[0.0] * g for _ in range(g)] for _ in range(g)]
    eps = {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1, (1, 0, 2): -1, (2, 1, 0): -1, (0, 2, 1): -1}
    for a in range(k):
        for (i, j, l), s in eps.items():
            c[3 * a + l][3 * a + i][3 * a + j] = -float(s)
    return c


@entry("oscillators", {"k": 2, "b": [1.0, 2.0]},
       "product of k isotropic 3-d oscillators in spherical coordinates")
def _oscillators(k, b):
    k, b = _osc_params(k, b)
    n = 6 * k
    names = _osc_names(k)
    coords = [c for blk in names for c in blk]
    params = {f"b{a + 1}": b[a] for a in range(k)}
    forms, h, gens, J = [], [], [], []
    for a, (r, th, ph, pr, pth, pph) in enumerate(names):
        off = 6 * a
        forms.append(wedge(n, (1, off + 1, off + 4), (1, off + 2, off + 5), (1, off + 3, off + 6)))
        h.append(f"({pr}^2 + {pth}^2/{r}^2 + {pph}^2/({r}^2*sin({th})^2) + b{a + 1}^2*{r}^2)/2")
        cot = f"cos({th})/sin({th})"

        def field(**comps):
            v = ["0"] * n
            for key, e in comps.items():
                v[off + ["r", "th", "ph", "pr", "pth", "pph"].index(key)] = e
            return v

        gens += [
            field(ph="1"),
            field(th=f"-sin({ph})", ph=f"-{cot}*cos({ph})",
                  pth=f"-cos({ph})*{pph}/sin({th})^2",
                  pph=f"cos({ph})*{pth} - {cot}*sin({ph})*{pph}"),
            field(th=f"cos({ph})", ph=f"-{cot}*sin({ph})",
                  pth=f"-sin({ph})*{pph}/sin({th})^2",
                  pph=f"sin({ph})*{pth} + {cot}*cos({ph})*{pph}"),
        ]
    for a, (r, th, ph, pr, pth, pph) in enumerate(names):
        cot = f"cos({th})/sin({th})"
        row = ["0"] * (3 * k)
        row[3 * a:3 * a + 3] = [pph, f"-sin({ph})*{pth} - {cot}*cos({ph})*{pph}",
                                f"cos({ph})*{pth} - {cot}*sin({ph})*{pph}"]
        J.append(row)
    domain, box, level, seeds, fam = [], [], [], [], []
    for a, (r, th, *_rest) in enumerate(names):
        domain += [f"{r} > 0", f"sin({th})^2 > 0.01"]
        box += [[0.5, 2.0], [0.4, math.pi - 0.4], [-math.pi, math.pi], [-1, 1], [-1, 1], [-1, 1]]
        level += [1.0, math.pi / 2, 0.3 * a, 0.0, 0.2, b[a]]
    for s in range(3):
        z = []
        for a in range(k):
            d = 0.05 * (s + 1) * (-1) ** (a + s)
            z += [1.0 + d, math.pi / 2, 0.4 * s - 0.2 * a, 0.5 * d, 0.0, b[a] * (1.0 - 0.5 * d)]
        seeds.append(z)
    constraints, xi = [], []
    for a, (r, th, ph, pr, pth, pph) in enumerate(names):
        constraints += [pr, pth, f"{th} - pi/2", f"{pph} - b{a + 1}*{r}^2"]
        xi += [f"{pph}/{r}^2", "0", "0"]
    spectra = [claim(f"spectrum-{a + 1}", "spectra", sorted([1.0, 4 * b[a] ** 2]), alpha=a + 1)
               for a in range(k)]
    red_coords, red_field, lyap = [], [], []
    for a in range(k):
        red_coords += [f"r{a + 1}", f"pr{a + 1}"]
        red_field += [f"pr{a + 1}", f"-b{a + 1}^2*r{a + 1} + L{a + 1}^2/r{a + 1}^3"]
        lyap.append(f"(pr{a + 1}^2 + L{a + 1}^2/r{a + 1}^2 + b{a + 1}^2*r{a + 1}^2)/2 - b{a + 1}^2")
    center = [1.0, 0.0] * k
    return {
        "name": "oscillators", "dimension": n, "k": k, "coordinates": coords, "parameters": params,
        "forms": forms, "hamiltonian": h,
        "symmetry": {"generators": gens, "momentum": J, "structure_constants": _so3_constants(k)},
        "domain": domain, "box": box, "levels": [{"seed": level}], "seeds": seeds,
        "reduced": {"coordinates": red_coords,
                    "parameters": {**params, **{f"L{a + 1}": b[a] for a in range(k)}},
                    "vector_field": red_field, "domain": [f"r{a + 1} > 0" for a in range(k)]},
        "claims": [
            claim("structure", "structure_valid", True),
            claim("momentum", "momentum_valid", True),
            claim("brackets", "bracket_closure", True),
            claim("cocycle", "cocycle", {"passed": True, "equivariant": True}),
            claim("invariance", "invariance", True),
            claim("isotropy", "isotropy_dim", k, note="one dimension per factor", alpha="joint"),
            claim("lemma", "lemma", [True, True], "derived"),
            *reduction_claims([True] * k, True, True,
                              {"reduced_dim": 2 * k, "ranks": [2] * k, "joint_kernel_dim": 0},
                              "derived"),
            claim("dynamics-reduction", "dynamics_reduction", True),
            claim("equilibria", "equilibria", True, tol=1e-8, constraints=constraints, xi=xi),
            *spectra,
            claim("classification", "classification", "FormallyStable"),
            claim("reduced-minimum", "reduced_minimum", "PositiveDefinite"),
            claim("gauge", "gauge", True, "derived"),
            claim("equivalence", "theorem_equivalence", True, "derived"),
            claim("lyapunov", "lyapunov", True, system="reduced", M=" + ".join(lyap), center=center,
                  radius=0.2, samples=400),
            claim("empirical", "empirical_stability", "stable-at-scale", "derived", system="reduced",
                  center=center, eps=0.1, delta=0.01, T=200.0, samples=6),
        ],
    }


@entry("oscillators-cartesian", {"k": 2, "b": [1.0, 2.0]},
       "product of k isotropic 3-d oscillators in Cartesian coordinates")
def _oscillators_cartesian(k, b):
    k, b = _osc_params(k, b)
    n = 6 * k
    coords, params = [], {f"b{a + 1}": b[a] for a in range(k)}
    forms, h, gens, J = [], [], [], []
    for a in range(1, k + 1):
        x = [f"q{a}_{i}" for i in (1, 2, 3)]
        p = [f"p{a}_{i}" for i in (1, 2, 3)]
        coords += x + p
        off = 6 * (a - 1)
        forms.append(wedge(n, *[(1, off + i, off + 3 + i) for i in (1, 2, 3)]))
        h.append(f"({p[0]}^2 + {p[1]}^2 + {p[2]}^2 + b{a}^2*({x[0]}^2 + {x[1]}^2 + {x[2]}^2))/2")
        for (i, j) in ((0, 1), (1, 2), (2, 0)):
            v = ["0"] * n
            v[off + j], v[off + i] = x[i], f"-{x[j]}"
            v[off + 3 + j], v[off + 3 + i] = p[i], f"-{p[j]}"
            gens.append(v)
    for a in range(1, k + 1):
        x = [f"q{a}_{i}" for i in (1, 2, 3)]
        p = [f"p{a}_{i}" for i in (1, 2, 3)]
        row = ["0"] * (3 * k)
        row[3 * (a - 1):3 * a] = [f"{x[i]}*{p[j]} - {x[j]}*{p[i]}" for i, j in ((0, 1), (1, 2), (2, 0))]
        J.append(row)
    level, degenerate, ic = [], [], []
    for a in range(k):
        level += [1.0, 0.2 * a, 0.1, -0.1, b[a], 0.3]
        ic += [1.0, 0.0, 0.2, 0.0, b[a], 0.1]
        degenerate += ([1.0, 0.0, 0.0, 0.5, 0.0, 0.0] if a == 0 else [1.0, 0.2 * a, 0.1, -0.1, b[a], 0.3])
    field = []
    for a in range(1, k + 1):
        field += [f"p{a}_{i}" for i in (1, 2, 3)] + [f"-b{a}^2*q{a}_{i}" for i in (1, 2, 3)]
    return {
        "name": "oscillators-cartesian", "dimension": n, "k": k, "coordinates": coords, "parameters": params,
        "forms": forms, "hamiltonian": h,
        "symmetry": {"generators": gens, "momentum": J, "structure_constants": _so3_constants(k)},
        "box": [[-1.5, 1.5]] * n, "levels": [{"seed": level}],
        "claims": [
            claim("structure", "structure_valid", True),
            claim("field", "hamiltonian_solve", True, field=field),
            claim("momentum", "momentum_valid", True),
            claim("brackets", "bracket_closure", True),
            claim("cocycle", "cocycle", {"passed": True, "equivariant": True}),
            claim("invariance", "invariance", True),
            claim("isotropy", "isotropy_dim", k, alpha="joint"),
            claim("lemma", "lemma", [True, True], "derived"),
            claim("rank-regular", "momentum_rank", 3 * k, "derived", at=level),
            claim("rank-drop", "momentum_rank", 3 * k - 1, "derived", note="zero angular momentum on factor 1",
                  at=degenerate),
            claim("rank-probe", "weak_regularity", {"constant_rank": False}, points=[level, degenerate]),
            claim("dynamics-reduction", "dynamics_reduction", True),
            claim("derivation", "derivation", True, "derived", f=[J[a][3 * a] for a in range(k)]),
            claim("conservation", "conservation", True, "derived", ic=ic, T=100.0),
        ],
    }


def _schwarz_fields():
    D = "(v3^2 + v4^2)"
    X = [
        ["v3", "v4", "v5", "v6", f"3/2*(2*v4*v5*v6 + (v5^2 - v6^2)*v3)/{D}",
         f"3/2*(2*v3*v5*v6 - v4*(v5^2 - v6^2))/{D}"],
        ["0", "0", "0", "0", "v3", "v4"],
        ["0", "0", "0", "0", "-v4", "v3"],
        ["0", "0", "-v3", "-v4", "-2*v5", "-2*v6"],
        ["0", "0", "v4", "-v3", "2*v6", "-2*v5"],
        ["-v4", "v3", "-v6", "v5", f"-3/2*(2*v3*v5*v6 - v4*(v5^2 - v6^2))/{D}",
         f"3/2*(2*v4*v5*v6 + v3*(v5^2 - v6^2))/{D}"],
    ]
    Y = [
        ["(v1^2 - v2^2)/2", "v1*v2", "v1*v3 - v2*v4", "v3*v2 + v1*v4",
         "v3^2 + v1*v5 - v4^2 - v2*v6", "v5*v2 + 2*v3*v4 + v1*v6"],
        ["1", "0", "0", "0", "0", "0"],
        ["0", "1", "0", "0", "0", "0"],
        ["-v1", "-v2", "-v3", "-v4", "-v5", "-v6"],
        ["v2", "-v1", "v4", "-v3", "v6", "-v5"],
        ["-v1*v2", "(v1^2 - v2^2)/2", "-(v2*v3 + v1*v4)", "v1*v3 - v2*v4",
         "-(2*v3*v4 + v2*v5 + v1*v6)", "v3^2 - v4^2 + v1*v5 - v2*v6"],
    ]
    return X, Y


@entry("schwarz", {}, "realified complex Schwarz system with forms d(eta^1), d(eta^2), d(eta^4)")
def _schwarz():
    n = 6
    X, Y = _schwarz_fields()
    return {
        "name": "schwarz", "dimension": n, "k": 3, "coordinates": [f"v{i}" for i in range(1, 7)],
        "forms": {"coframe": {"frame": Y, "select": [1, 2, 4]}},
        "vector_field": X[0],
        "symmetry": {"generators": [X[5]], "momentum": "differential", "structure_constants": [[[0]]]},
        "domain": ["v3^2 + v4^2 > 0.1"],
        "box": [[-1, 1]] * n,
        "levels": [{"seed": [0.3, -0.2, 0.8, 0.5, -0.4, 0.6]}],
        "claims": [
            claim("structure", "structure_valid", True),
            claim("frame-Y", "frame_independent", True, fields=Y),
            claim("frame-X", "frame_independent", True, note="generic rank; the determinant has a zero set",
                  fields=X, criterion="rank"),
            *[claim(f"X{i + 1}-hamiltonian", "is_hamiltonian_field", [True] * 3, field=X[i]) for i in range(6)],
            claim("kernel-1", "kernel", [Y[1], Y[2]], alpha=1),
            claim("kernel-2", "kernel", [Y[0], Y[5]], alpha=2),
            claim("kernel-3", "kernel", [Y[3], Y[4]], alpha=3),
            claim("momentum", "momentum_valid", True),
            claim("invariance", "invariance", True),
            claim("level-dim", "level_dim", 3),
            claim("lemma", "lemma", [True, True], "derived"),
            *reduction_claims([True, True, True], True, None),
            claim("tangency", "dynamics_reduction", True),
        ],
    }


@entry("affine-lie", {"c1": 0.0, "c2": 0.0, "c3": 0.0, "c4": 1.0, "c5": 0.0, "c6": 1.0},
       "affine Lie system on R^5 with h = sum c_i h_i (default Y = X4 + X6)")
def _affine(c1, c2, c3, c4, c5, c6):
    n = 5
    cs = {f"c{i}": float(v) for i, v in enumerate((c1, c2, c3, c4, c5, c6), start=1)}
    h = ["-c1*x4 + c3*x5 + c4*x1 - c5*x3 + c6*(x3^2 + x5^2)/2",
         "-c2*x4 + c3*x5 + c4*x2 - c5*x3 + c6*(x3^2 + x5^2)/2"]
    symmetric = cs["c1"] == 0 and cs["c2"] == 0
    plain = symmetric and cs["c3"] == 0 and cs["c5"] == 0 and cs["c4"] != 0 and cs["c6"] > 0
    claims = [
        claim("structure", "structure_valid", True),
        claim("momentum", "momentum_valid", True),
        claim("orbit", "orbit_tangent", [unit(n, 4)]),
        claim("lemma", "lemma", [True, True], "derived"),
        *reduction_claims([True, True], True, True,
                          {"reduced_dim": 2, "ranks": [2, 2], "joint_kernel_dim": 0}, "derived"),
        claim("dynamics-reduction", "dynamics_reduction", symmetric,
              note="holds exactly when c1 = c2 = 0"),
    ]
    if plain:
        claims += [
            claim("equilibria", "equilibria", True, "reference" if cs["c4"] == cs["c6"] == 1 else "derived",
                  tol=1e-9, constraints=["x3", "x5"], xi=["c4"]),
            claim("classification", "classification", "FormallyStable"),
            claim("reduced-minimum", "reduced_minimum", "PositiveDefinite"),
            claim("gauge", "gauge", True, "derived"),
            claim("equivalence", "theorem_equivalence", True, "derived"),
            claim("lyapunov", "lyapunov", True, system="reduced", M="x3^2 + x5^2", center=[0, 0],
                  radius=0.5, samples=400),
            claim("empirical", "empirical_stability", "stable-at-scale", "derived", system="reduced",
                  center=[0, 0], eps=0.1, delta=0.01, T=200.0, samples=6),
        ]
    return {
        "name": "affine-lie", "dimension": n, "k": 2, "parameters": cs,
        "forms": [wedge(n, (1, 3, 5), (1, 4, 1)), wedge(n, (1, 3, 5), (1, 4, 2))],
        "hamiltonian": h,
        "symmetry": {"generators": [unit(n, 4)], "momentum": [["x1"], ["x2"]], "structure_constants": [[[0]]]},
        "levels": [{"seed": [0.3, -0.2, 0.1, 0.4, 0.2]}],
        "seeds": [[0.2, -0.1, 0.05, 0.3, -0.04], [-0.5, 0.4, -0.1, 0.0, 0.08], [0.0, 0.0, 0.2, -0.3, 0.1]],
        "reduced": {"coordinates": ["x3", "x5"], "parameters": cs,
                    "vector_field": ["c6*x5 + c3", "-c6*x3 + c5"]},
        "claims": claims,
    }


@entry("quantum-quadratic", {}, "Wei-Norman system for quadratic quantum Hamiltonians, field X5")
def _quantum():
    n = 6
    w1 = wedge(n, (1, 1, 3), (1, 2, 4), (1, 5, 1), (1, 4, 6))
    w2 = wedge(n, (1, 4, 6), (-1, 3, 5))
    return {
        "name": "quantum-quadratic", "dimension": n, "k": 2, "coordinates": [f"v{i}" for i in range(1, 7)],
        "forms": [w1, w2], "hamiltonian": ["v1 + v4^2/2", "v3 + v4^2/2"],
        "symmetry": {"generators": [unit(n, 5)], "momentum": [["v1"], ["v3"]], "structure_constants": [[[0]]]},
        "levels": [{"seed": [0.4, -0.3, 0.2, 0.5, 0.1, -0.6]}],
        "seeds": [[0.4, -0.3, 0.2, 0.05, 0.1, -0.6], [-0.2, 0.6, 0.1, -0.08, 0.3, 0.2],
                  [0.0, 0.1, -0.5, 0.02, -0.4, 0.7]],
        "reduced": {"coordinates": ["v2", "v4", "v6"], "vector_field": ["0", "0", "-v4"]},
        "claims": [
            claim("structure", "structure_valid", True),
            claim("kernel-1", "kernel", [unit(n, 3, 5), unit(n, 2, 6)], alpha=1),
            claim("kernel-2", "kernel", [unit(n, 1), unit(n, 2)], alpha=2),
            claim("field", "hamiltonian_solve", True, field=["0", "0", "0", "0", "1", "-v4"]),
            claim("momentum", "momentum_valid", True),
            claim("lemma", "lemma", [True, True], "derived"),
            claim("reduced-ranks", "reduced_ranks", {"reduced_dim": 3, "ranks": [2, 2], "joint_kernel_dim": 0}),
            claim("dynamics-reduction", "dynamics_reduction", True),
            claim("equilibria", "equilibria", True, tol=1e-9, constraints=["v4"], xi=["1"]),
            claim("classification", "classification", "Inconclusive", "derived",
                  note="semidefinite blocks; not formally stable"),
            claim("reduced-minimum", "reduced_minimum", "PositiveSemidefinite"),
            claim("gauge", "gauge", True, "derived"),
            claim("equivalence", "theorem_equivalence", True, "derived"),
            claim("empirical", "empirical_stability", "instability-detected", "derived", system="reduced",
                  center=[0, 0, 0], eps=0.1, delta=0.01, T=200.0, samples=6),
        ],
    }


def polynomial_verdict(b, c, d, e):
    """Expected classification at the equilibrium family for integer exponents."""
    blocks = [(int(c) > 1) + (int(b) > 1), (int(e) > 1) + (int(d) > 1)]
    if all(v == 0 for v in blocks):
        return "FormallyStable"
    if any(v == 2 for v in blocks):
        return "NotFormallyStable"
    return "Inconclusive"


@entry("polynomial", {"a": 1, "b": 1, "c": 1, "d": 1, "e": 1},
       "polynomial vector field on R^8 with a weakly regular but nowhere regular momentum map")
def _polynomial(a, b, c, d, e):
    ex = {"a": a, "b": b, "c": c, "d": d, "e": e}
    for key, v in ex.items():
        if int(v) != v or v < 1:
            raise ValueError(f"polynomial: exponent {key} must be a positive integer")
    a, b, c, d, e = (int(ex[s]) for s in "abcde")
    n = 8
    h = [f"x4^{b + 1}/{b + 1} + x3^{c + 1}/{c + 1}",
         f"x6^{a + 1}/{a + 1} + x8^{d + 1}/{d + 1} + x7^{e + 1}/{e + 1}"]
    field = ["0", f"x6^{a}", f"x4^{b}", f"-x3^{c}", "0", "0", f"x8^{d}", f"-x7^{e}"]
    family = [[0.3, -0.5, 0, 0, 0.7, 0.4, 0, 0], [-1.0, 0.2, 0, 0, 0.1, -0.6, 0, 0],
              [0.5, 0.5, 0, 0, -0.3, 0.9, 0, 0]]
    verdict = polynomial_verdict(b, c, d, e)
    claims = [
        claim("structure", "structure_valid", True),
        claim("kernel-1", "kernel", [unit(n, 2), unit(n, 6), unit(n, 7), unit(n, 8)], alpha=1),
        claim("kernel-2", "kernel", [unit(n, 1), unit(n, 3), unit(n, 4), unit(n, 5)], alpha=2),
        claim("field", "hamiltonian_solve", True, field=field),
        claim("momentum", "momentum_valid", True),
        claim("cocycle", "cocycle", {"passed": True, "equivariant": False}, "derived",
              "constant cocycle: the x1 translation shifts J^1_3 = -x1 by -1"),
        claim("level-tangent", "level_tangent", [unit(n, i) for i in (2, 3, 4, 7, 8)]),
        claim("weak-regularity", "weak_regularity",
              {"verdict": "WeaklyRegular", "rank": 3, "level_dim": 5, "regular": False}),
        claim("isotropy", "isotropy_dim", 1, alpha="joint"),
        claim("lemma", "lemma", [True, True], "derived"),
        *reduction_claims([True, True], True, True,
                          {"reduced_dim": 4, "ranks": [2, 2], "joint_kernel_dim": 0}, "derived"),
        claim("dynamics-reduction", "dynamics_reduction", True),
        claim("critical", "h_xi_gradient", [[0.0] * n, [0.0] * n],
              at=family[0], xi=[family[0][5] ** a, 0, 0]),
        claim("critical-xi2", "h_xi_gradient", [[0, 0, 0, 0, -0.5, 0, 0, 0], [0.0] * n],
              at=family[0], xi=[family[0][5] ** a, 0.5, 0]),
        claim("equilibria", "equilibria", True, tol=1e-9, constraints=["x3", "x4", "x7", "x8"],
              xi=[f"x6^{a}", "0", "0"]),
        claim("classification", "classification", verdict),
        claim("gauge", "gauge", True, "derived"),
        claim("equivalence", "theorem_equivalence", True, "derived"),
    ]
    if verdict == "FormallyStable":
        claims += [claim("conservation", "conservation", True, "derived",
                         ic=[0.1, 0.2, 0.3, -0.2, 0.4, 0.5, 0.1, -0.3], T=100.0),
                   claim("spectrum-1", "spectra", [1.0, 1.0], "derived", alpha=1),
                   claim("spectrum-2", "spectra", [1.0, 1.0], "derived", alpha=2),
                   claim("empirical", "empirical_stability", "stable-at-scale", "derived", system="full",
                         center=family[0], eps=0.1, delta=0.01, T=200.0, samples=6)]
    elif b == 2 and c == d == e == 1:
        claims.append(claim("empirical", "empirical_stability", "instability-detected", "derived", system="full",
                            center=family[0], eps=0.1, delta=0.01, T=200.0, samples=6))
    return {
        "name": "polynomial", "dimension": n, "k": 2, "forms": [wedge(n, (1, 3, 4), (1, 1, 5)),
                                                                 wedge(n, (1, 2, 6), (1, 7, 8))],
        "hamiltonian": h, "vector_field": field,
        "symmetry": {"generators": [unit(n, 2), unit(n, 1), unit(n, 5)],
                     "momentum": [["0", "x5", "-x1"], ["x6", "0", "0"]],
                     "structure_constants": [[[0] * 3] * 3] * 3},
        "levels": [{"seed": [0.1, 0.2, 0.3, -0.2, 0.4, 0.5, 0.1, -0.3]}],
        "family": family,
        "monitors": ["x3", "x4", "x7", "x8"],
        "claims": claims,
    }
