import pytest

from psmech import catalog, run_claims
from psmech.claims import evaluate_claim, Context, matches
from psmech.system import System


@pytest.fixture(scope="module", params=catalog.ids())
def report(request):
    return request.param, run_claims(catalog.load(request.param))


def test_every_claim_holds(report):
    name, rep = report
    bad = [(r.id, r.actual, r.error) for r in rep.results if not r.passed]
    assert rep.passed and not bad, (name, bad)
    assert rep.results


def test_exported_file_gives_identical_results(report):
    name, rep = report
    again = run_claims(System.from_json(catalog.load(name).to_json()))
    assert again.as_dict() == rep.as_dict()


def test_seed_changes_samples_but_not_verdicts():
    S = catalog.load("counterexample-r4")
    a, b = run_claims(S, seed=0), run_claims(S, seed=7)
    assert a.passed and b.passed


def test_wrong_expectations_fail_with_the_observed_value():
    S = catalog.load("counterexample-r4")
    ctx = Context(S, 0)
    r = evaluate_claim(ctx, {"id": "x", "kind": "blacker", "expected": True})
    assert not r.passed and r.actual is False and r.error is None
    r = evaluate_claim(ctx, {"id": "y", "kind": "no-such-kind", "expected": 1})
    assert not r.passed and "unknown claim kind" in r.error
    r = evaluate_claim(ctx, {"id": "z", "kind": "classification", "expected": "FormallyStable"})
    assert not r.passed and r.error


def test_structural_matching():
    assert matches({"a": 1}, {"a": 1.0000000001, "b": 2})
    assert not matches({"a": 1}, {"b": 1})
    assert matches([1.0, [2.0]], [1.0, [2.0 + 1e-12]])
    assert not matches(True, 1)
    assert not matches([1, 2], [1, 2, 3])


def test_parameterised_entries():
    for b in (0.5, 1.0, 2.0):
        rep = run_claims(catalog.load("oscillators", k=1, b=b), only={"spectrum-1", "classification"})
        assert rep.passed and len(rep.results) == 2
    assert run_claims(catalog.load("integrable", k=3)).passed
    assert run_claims(catalog.load("polynomial", b=2, c=2)).passed
