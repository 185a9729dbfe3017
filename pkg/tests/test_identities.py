import numpy as np

from cl3dirac import algebra as al
from cl3dirac.identities import run_suite


def test_suite_passes_and_is_deterministic():
    a = run_suite(500, seed=7)
    b = run_suite(500, seed=7)
    assert all(r.passed for r in a), [r for r in a if not r.passed]
    assert [r.max_error for r in a] == [r.max_error for r in b]


def test_zero_cases_is_empty():
    assert run_suite(0) == []


def test_sign_flip_mutation_is_caught(monkeypatch):
    original = al._cross
    monkeypatch.setattr(al, "_cross", lambda a, b: -original(a, b))
    failed = {r.name for r in run_suite(200, seed=0) if not r.passed}
    assert "product" in failed
    assert "orientation" in failed


def test_bar_mutation_is_caught(monkeypatch):
    def bad_bar(p):
        c = p.coeffs.copy()
        c[1:3] *= -1
        return al.Paravector(c)

    monkeypatch.setattr(al, "bar", bad_bar)
    failed = {r.name for r in run_suite(200, seed=0) if not r.passed}
    assert {"bar", "fierz"} <= failed
