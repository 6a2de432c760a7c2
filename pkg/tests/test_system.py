import json

import numpy as np
import pytest

from psmech import catalog
from psmech.system import System, SystemFileError


def minimal(**extra):
    doc = {"name": "plane", "dimension": 2, "k": 1, "forms": [[["", "1"], ["", ""]]]}
    doc.update(extra)
    return doc


def test_minimal_document_and_lower_triangle_fill():
    S = System(minimal(hamiltonian=["(x1^2 + x2^2)/2"]))
    A = S.structure.matrices([0.0, 0.0])[0]
    assert A.tolist() == [[0.0, 1.0], [-1.0, 0.0]]
    assert np.allclose(S.field().value([1.0, 0.0]), [0.0, -1.0])


@pytest.mark.parametrize("doc, where", [
    ({"dimension": 2, "k": 1}, "forms"),
    ({"k": 1, "forms": []}, "dimension"),
    (minimal(forms=[[["", "1"]]]), "forms[0]"),
    (minimal(forms=[[["", "x1 +"], ["", ""]]]), "forms[0]"),
    (minimal(hamiltonian=["x1", "x2"]), "hamiltonian"),
    (minimal(coordinates=["a"]), "coordinates"),
    (minimal(symmetry={"generators": [["1", "0"]], "momentum": [["x2", "x1"]]}), "symmetry.momentum"),
    (minimal(symmetry={"generators": [["1", "0"]], "momentum": [["x2"]], "structure_constants": [[0]]}),
     "symmetry.structure_constants"),
    (minimal(levels=[{"seed": [0.0]}]), "levels[0].seed"),
])
def test_validation_errors_name_the_field(doc, where):
    with pytest.raises(SystemFileError) as exc:
        System(doc)
    assert exc.value.path.startswith(where)


def test_malformed_json_reports_position(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text('{"name": 1,,}')
    with pytest.raises(SystemFileError) as exc:
        System.load(f)
    assert "line 1" in str(exc.value)
    with pytest.raises(SystemFileError):
        System.load(tmp_path / "missing.json")


def test_explicit_lower_entries_must_be_skew():
    S = System(minimal(forms=[[["", "1"], ["1", ""]]]))
    assert S.skew_violations([np.zeros(2)]) == ["forms[0][1][0] = 1"]
    S = System(minimal(forms=[[["", "x1"], ["-x1", ""]]]))
    assert S.skew_violations([np.ones(2)]) == []


def test_level_mu_defaults_to_momentum_at_seed():
    S = catalog.load("counterexample-r4")
    assert S.levels[0].mu.tolist() == [[0.7], [0.5]]


def test_domain_and_box_sampling():
    S = catalog.load("schwarz")
    pts = S.sample_points(30, np.random.default_rng(0))
    assert all(p[2] ** 2 + p[3] ** 2 > 0.01 for p in pts)
    assert all(np.all(p >= -1) and np.all(p <= 1) for p in pts)


def test_level_samples_stay_on_level():
    S = catalog.load("oscillators-cartesian")
    pts = S.sample_level(15, np.random.default_rng(0))
    mu = S.levels[0].mu
    for p in pts:
        assert np.max(np.abs(S.symmetry.momentum_values(p) - mu)) < 1e-9


@pytest.mark.parametrize("name", catalog.ids())
def test_json_round_trip(name):
    S = catalog.load(name)
    T = System.from_json(S.to_json())
    assert T.to_dict() == S.to_dict()
    p = S.sample_points(1, np.random.default_rng(0))[0]
    for A, B in zip(S.structure.matrices(p), T.structure.matrices(p)):
        assert np.array_equal(A, B)


def test_coframe_inverts_the_frame_and_differentiates_it():
    S = catalog.load("schwarz")
    cof = S.coframe
    p = np.array([0.3, -0.2, 0.8, 0.5, -0.4, 0.6])
    F = cof.frame_matrix(p)
    E = np.linalg.inv(F)
    # eta^j(Y_i) = delta_ij
    assert np.allclose(E @ F, np.eye(6))
    # d(eta^1) from finite differences of the numerical inverse
    h = 1e-6
    G = np.column_stack([(np.linalg.inv(cof.frame_matrix(p + h * e))[0] - np.linalg.inv(cof.frame_matrix(p - h * e))[0])
                         / (2 * h) for e in np.eye(6)])  # G[j, i] = d_i eta_j
    A = S.structure.matrices(p)[0]
    assert np.allclose(A, G.T - G, atol=1e-7)


def test_catalog_parameters_are_validated():
    with pytest.raises(ValueError):
        catalog.load("polynomial", f=1)
    with pytest.raises(ValueError):
        catalog.load("polynomial", b=0)
    with pytest.raises(ValueError):
        catalog.load("oscillators", k=2, b=[1, 2, 3])
    with pytest.raises(catalog.UnknownEntry):
        catalog.load("nope")
    doc = catalog.document("oscillators", k=1, b=2.0)
    assert json.loads(json.dumps(doc))["catalog"] == {"id": "oscillators", "params": {"k": 1, "b": 2.0}}
