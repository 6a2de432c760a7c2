"""Systems as JSON documents: loading, validation, export and point sampling."""

from __future__ import annotations

import copy
import json
import re

import numpy as np

from .expr import (DomainError, Dual, ExprError, MatrixFieldExpr, ScalarField, VectorFieldExpr,
                   _constant_table, _eval_dual)
from .geometry import KFunction, PolySymplecticStructure
from .symmetry import LevelSpec, SymmetryModel

SCHEMA = "psmech.system/1"


class SystemFileError(ValueError):
    """Invalid system document; ``path`` locates the offending entry."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


# ---------------------------------------------------------------------------
# domain predicates

_CMP = re.compile(r"(>=|<=|!=|>|<)")
_OPS = {">": lambda d: d > 0, ">=": lambda d: d >= 0, "<": lambda d: d < 0,
        "<=": lambda d: d <= 0, "!=": lambda d: d != 0}


class Predicate:
    """An inequality ``lhs OP rhs`` with OP one of > >= < <= !=."""

    def __init__(self, text, n, params=None, aliases=None):
        parts = _CMP.split(text)
        if len(parts) != 3:
            raise ExprError(f"domain predicate needs exactly one comparison: {text!r}")
        lhs, op, rhs = parts
        self.text = text
        self.op = op
        self.lhs = ScalarField(lhs.strip(), n, params, aliases)
        self.rhs = ScalarField(rhs.strip() or "0", n, params, aliases)

    def __str__(self):
        return self.text

    def margin(self, x) -> float:
        return self.lhs.value(x) - self.rhs.value(x)

    def holds(self, x) -> bool:
        try:
            return bool(_OPS[self.op](self.margin(x)))
        except DomainError:
            return False


# ---------------------------------------------------------------------------
# forms given as d(eta^a) for the coframe dual to a frame of vector fields

class Coframe:
    """Coframe eta dual to a frame Y_1..Y_n, differentiated through the inverse.

    The frame matrix F[i, b] = (Y_b)_i is evaluated as second-order dual
    numbers and inverted by Gauss-Jordan elimination on those jets, so the
    coefficients eta^a_i and their first and second partials come out exact
    up to rounding.
    """

    def __init__(self, frame, n, params=None, aliases=None):
        if len(frame) != n:
            raise ExprError(f"coframe needs {n} frame fields, got {len(frame)}")
        self.n = n
        self.fields = [VectorFieldExpr(f, n, params, aliases) for f in frame]
        self._key = None
        self._eta = None

    def frame_matrix(self, p) -> np.ndarray:
        return np.column_stack([Y.value(p) for Y in self.fields])

    def eta(self, p):
        """n x n array of Dual (order 2): eta[a][i] is the i-th coefficient of eta^a."""
        p = np.asarray(p, dtype=float)
        key = p.tobytes()
        if key == self._key:
            return self._eta
        n = self.n
        seeds = Dual.seed(p, order=2)
        F = [[None] * n for _ in range(n)]
        for b, Y in enumerate(self.fields):
            for i, c in enumerate(Y.components):
                F[i][b] = _eval_dual(c.expr, seeds, n, 2, c._consts)
        self._eta = _invert(F, n)
        self._key = key
        return self._eta


def _invert(F, n):
    M = [row[:] + [Dual.constant(1.0 if i == j else 0.0, n, 2) for j in range(n)]
         for i, row in enumerate(F)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col].value))
        if M[piv][col].value == 0.0:
            raise DomainError("frame is singular at this point")
        M[col], M[piv] = M[piv], M[col]
        inv = M[col][col].reciprocal()
        M[col] = [e * inv for e in M[col]]
        for r in range(n):
            if r != col:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [row[n:] for row in M]


class CoframeForm:
    """omega = d eta^a, with A_ij = d_i eta_j - d_j eta_i."""

    def __init__(self, coframe: Coframe, a: int):
        self.coframe = coframe
        self.a = a
        self.n = coframe.n

    def value(self, p) -> np.ndarray:
        eta = self.coframe.eta(p)[self.a]
        G = np.array([e.partials for e in eta])  # G[j, i] = d_i eta_j
        return G.T - G

    def derivative(self, p) -> np.ndarray:
        eta = self.coframe.eta(p)[self.a]
        H = np.array([e.hess for e in eta])  # H[j, i, l] = d_i d_l eta_j
        return np.transpose(H, (1, 0, 2)) - H


# ---------------------------------------------------------------------------
# the system object

class System:
    """A k-polysymplectic system assembled from a JSON-compatible document."""

    def __init__(self, doc: dict):
        self.doc = copy.deepcopy(doc)
        self._build()

    # -- construction -------------------------------------------------------
    def _build(self):
        d = self.doc
        try:
            self.name = str(d.get("name", "unnamed"))
            self.n = int(d["dimension"])
            self.k = int(d["k"])
        except KeyError as exc:
            raise SystemFileError(exc.args[0], "missing required field") from None
        except (TypeError, ValueError) as exc:
            raise SystemFileError("dimension", str(exc)) from None
        n, k = self.n, self.k
        coords = d.get("coordinates") or [f"x{i + 1}" for i in range(n)]
        if len(coords) != n:
            raise SystemFileError("coordinates", f"expected {n} names, got {len(coords)}")
        self.coordinates = list(coords)
        self.aliases = {c: i for i, c in enumerate(coords) if not re.fullmatch(r"x\d+", c)}
        self.params = {str(kk): float(v) for kk, v in (d.get("parameters") or {}).items()}

        forms = d.get("forms")
        if forms is None:
            raise SystemFileError("forms", "missing required field")
        if isinstance(forms, dict) and "coframe" in forms:
            cf = forms["coframe"]
            frame = self._exprs(cf.get("frame"), "forms.coframe.frame", (n, n))
            cof = Coframe(frame, n, self.params, self.aliases)
            sel = cf.get("select") or list(range(1, k + 1))
            if len(sel) != k:
                raise SystemFileError("forms.coframe.select", f"expected {k} indices")
            self.forms = [CoframeForm(cof, int(s) - 1) for s in sel]
            self.coframe = cof
        else:
            if not isinstance(forms, list) or len(forms) != k:
                raise SystemFileError("forms", f"expected a list of {k} matrices")
            self.forms = []
            for a, F in enumerate(forms):
                path = f"forms[{a}]"
                if not isinstance(F, list) or len(F) != n or any(not isinstance(r, list) or len(r) != n for r in F):
                    raise SystemFileError(path, f"expected an {n}x{n} matrix")
                for i, row in enumerate(F):
                    for j, e in enumerate(row):
                        if isinstance(e, str) and e.strip():
                            self._wrap(f"{path}[{i}][{j}]", lambda e=e: ScalarField(e, n, self.params, self.aliases))
                self.forms.append(self._wrap(path, lambda F=F: MatrixFieldExpr(F, n, self.params, self.aliases)))
            self.coframe = None
        self.structure = PolySymplecticStructure(self.forms, n)

        self.domain = [self._wrap(f"domain[{i}]", lambda t=t: Predicate(t, n, self.params, self.aliases))
                       for i, t in enumerate(d.get("domain") or [])]
        box = d.get("box") or [[-1.0, 1.0]] * n
        if len(box) != n:
            raise SystemFileError("box", f"expected {n} intervals")
        self.box = np.array(box, dtype=float)

        h = d.get("hamiltonian")
        if h is not None:
            h = self._exprs(h, "hamiltonian", (k,))
            self.hamiltonian = KFunction([self._wrap(f"hamiltonian[{a}]",
                                                     lambda e=e: ScalarField(e, n, self.params, self.aliases))
                                          for a, e in enumerate(h)])
        else:
            self.hamiltonian = None
        vf = d.get("vector_field")
        self.vector_field = None if vf is None else self._wrap(
            "vector_field", lambda: VectorFieldExpr(self._exprs(vf, "vector_field", (n,)), n, self.params, self.aliases))

        self.symmetry = self._build_symmetry(d.get("symmetry"))
        self.levels = []
        for i, lv in enumerate(d.get("levels") or []):
            seed = np.array(lv["seed"], dtype=float)
            if seed.shape != (n,):
                raise SystemFileError(f"levels[{i}].seed", f"expected {n} values")
            mu = lv.get("mu")
            if mu is None and self.symmetry is not None and not self.symmetry.differential_only:
                mu = self.symmetry.momentum_values(seed)
            self.levels.append(LevelSpec(None if mu is None else np.array(mu, dtype=float), seed))
        self.seeds = [np.array(s, dtype=float) for s in d.get("seeds") or []]
        for i, s in enumerate(self.seeds):
            if s.shape != (n,):
                raise SystemFileError(f"seeds[{i}]", f"expected {n} values")
        self.monitors = None
        if d.get("monitors"):
            self.monitors = self._wrap("monitors", lambda: [ScalarField(e, n, self.params, self.aliases)
                                                            for e in d["monitors"]])
        self.claims = list(d.get("claims") or [])
        self.reduced = d.get("reduced")

    def _wrap(self, path, make):
        try:
            return make()
        except ExprError as exc:
            raise SystemFileError(path, str(exc)) from None

    def _exprs(self, value, path, shape):
        arr = value
        if not isinstance(arr, list) or len(arr) != shape[0]:
            raise SystemFileError(path, f"expected {shape[0]} entries")
        if len(shape) == 2 and any(not isinstance(r, list) or len(r) != shape[1] for r in arr):
            raise SystemFileError(path, f"expected rows of {shape[1]} entries")
        return arr

    def _build_symmetry(self, s):
        if s is None:
            return None
        n, k = self.n, self.k
        gens = s.get("generators") or []
        G = [self._wrap(f"symmetry.generators[{i}]",
                        lambda g=g: VectorFieldExpr(self._exprs(g, f"symmetry.generators[{i}]", (n,)),
                                                    n, self.params, self.aliases))
             for i, g in enumerate(gens)]
        gdim = len(G)
        mom = s.get("momentum", "differential")
        if mom == "differential" or mom is None:
            J = None
        else:
            self._exprs(mom, "symmetry.momentum", (k, gdim))
            J = [[self._wrap(f"symmetry.momentum[{a}][{i}]",
                             lambda e=e: ScalarField(e, n, self.params, self.aliases))
                  for i, e in enumerate(row)] for a, row in enumerate(mom)]
        c = s.get("structure_constants")
        if c is not None and np.array(c, dtype=float).shape != (gdim,) * 3:
            raise SystemFileError("symmetry.structure_constants", f"expected shape {(gdim,) * 3}")
        override = {}
        for key, idx in (s.get("isotropy_override") or {}).items():
            override["joint" if key == "joint" else int(key) - 1] = [int(i) - 1 for i in idx]
        return SymmetryModel(G, J, c, override, bool(s.get("quotientable", True)))

    # -- serialisation ------------------------------------------------------
    def to_dict(self) -> dict:
        out = copy.deepcopy(self.doc)
        out.setdefault("schema", SCHEMA)
        return out

    def to_json(self, indent=2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "System":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SystemFileError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
        if not isinstance(doc, dict):
            raise SystemFileError("", "top level must be an object")
        return cls(doc)

    @classmethod
    def load(cls, path) -> "System":
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise SystemFileError(str(path), exc.strerror or str(exc)) from None
        try:
            return cls.from_json(text)
        except SystemFileError as exc:
            raise SystemFileError(f"{path}: {exc.path}" if exc.path else str(path), str(exc).split(": ", 1)[-1]) from None

    # -- helpers ------------------------------------------------------------
    def in_domain(self, x) -> bool:
        return all(pred.holds(x) for pred in self.domain)

    def skew_violations(self, points):
        """Explicit lower-triangle or diagonal entries that contradict skewness."""
        bad = []
        for a, F in enumerate(self.forms):
            if isinstance(F, MatrixFieldExpr):
                for i, j, text in F.skew_violations(points):
                    bad.append(f"forms[{a}][{i}][{j}] = {text}")
        return bad

    def sample_points(self, count, rng, max_tries=None):
        """Uniform points of the sampling box that satisfy the domain predicates."""
        out = []
        tries = 0
        max_tries = max_tries or 200 * count
        lo, hi = self.box[:, 0], self.box[:, 1]
        while len(out) < count:
            tries += 1
            if tries > max_tries:
                raise RuntimeError(f"domain sampler accepted only {len(out)} of {count} points")
            x = rng.uniform(lo, hi)
            if self.in_domain(x):
                out.append(x)
        return out

    def sample_level(self, count, rng, level_index=0, step=0.3):
        """Points on the designated level (each point is its own level in differential mode)."""
        from .symmetry import sample_level_set
        S = self.symmetry
        if S is None or S.differential_only or not self.levels:
            return self.sample_points(count, rng)
        return sample_level_set(self.structure, S, self.levels[level_index], count, rng,
                                step=step, accept=self.in_domain)

    def field(self):
        """X_h: the declared vector field or the pointwise Hamiltonian solve."""
        from .geometry import HamiltonianVectorField
        if self.vector_field is not None:
            return self.vector_field
        if self.hamiltonian is None:
            raise ValueError("system has neither a Hamiltonian nor a vector field")
        return HamiltonianVectorField(self.structure, self.hamiltonian)


def expr_list(fields):
    return [str(f) for f in fields]
