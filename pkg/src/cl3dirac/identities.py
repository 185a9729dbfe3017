"""Randomized invariant suite for the algebra layer.

Every law is evaluated on a batch of random elements and reduced to one
number: the largest relative error over the batch.  Oracle laws compare the
coefficient implementation with the Pauli-matrix representation; identity
laws check algebraic statements directly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import algebra as al
from . import lorentz as lz
from . import matrix as mx

ORACLE_TOL = 1e-12
IDENTITY_TOL = 1e-12
LORENTZ_TOL = 1e-11
FACTOR_TOL = 1e-10


@dataclass(frozen=True)
class LawResult:
    name: str
    group: str
    max_error: float
    tol: float
    cases: int

    @property
    def passed(self) -> bool:
        return bool(self.max_error <= self.tol)


def _rel(a: np.ndarray, b: np.ndarray, axis=0) -> float:
    """Largest per-case ``|a - b| / max(1, |b|)`` (coefficients along ``axis``)."""
    a, b = np.asarray(a), np.asarray(b)
    if a.size == 0:
        return 0.0
    if a.ndim == b.ndim and a.ndim > 1:
        diff = np.sqrt(np.sum(np.abs(a - b) ** 2, axis=axis))
        ref = np.sqrt(np.sum(np.abs(b) ** 2, axis=axis))
    else:
        diff, ref = np.abs(a - b), np.abs(b)
    return float(np.max(diff / np.maximum(1.0, ref)))


def _pc(p: al.Paravector, q: al.Paravector) -> float:
    return _rel(p.coeffs, q.coeffs)


def oracle_laws(p: al.Paravector, q: al.Paravector) -> dict[str, float]:
    """Coefficient implementation against the matrix representation."""
    P, Q = mx.to_matrix(p), mx.to_matrix(q)
    mat = lambda m: mx.from_matrix(m).coeffs  # noqa: E731
    out = {
        "round_trip": _rel(mx.from_matrix(P).coeffs, p.coeffs),
        "product": _rel(al.mul(p, q).coeffs, mat(P @ Q)),
        "dagger": _rel(al.dagger(p).coeffs, mat(mx.mat_dagger(P))),
        "bar": _rel(al.bar(p).coeffs, mat(mx.adjugate(P))),
        "hat": _rel(al.hat(p).coeffs, mat(mx.mat_hat(P))),
        "det": _rel(al.det(p), mx.mat_det(P)),
        "scalar_product": _rel(al.scalar_product(p, q), mx.mat_scalar_product(P, Q)),
    }
    d = np.abs(al.det(p))
    ok = d > 1e-3 * al.frobenius_norm2(p)
    if np.any(ok):
        pi = al.Paravector(p.coeffs[:, ok])
        out["inverse"] = _rel(al.inverse(pi).coeffs, mat(mx.mat_inverse(mx.to_matrix(pi))))
    else:
        out["inverse"] = 0.0
    return out


def identity_laws(p: al.Paravector, q: al.Paravector) -> dict[str, float]:
    E, D = al.BASIS, al.DUAL_BASIS
    n = p.batch_shape
    one = al.E0
    out: dict[str, float] = {}

    err = 0.0
    for k in range(1, 4):
        for l in range(1, 4):
            s = al.mul(E[k], E[l]) + al.mul(E[l], E[k])
            err = max(err, float(np.max(np.abs(s.coeffs - 2.0 * (k == l) * one.coeffs))))
    out["structure_equations"] = err
    # orientation: e1 e2 = i e3 and cyclic
    out["orientation"] = max(_pc(al.mul(E[a], E[b]), 1j * E[c]) for a, b, c in ((1, 2, 3), (2, 3, 1), (3, 1, 2)))

    ps = al.mul_many(E[1], E[2], E[3])
    err = _pc(al.mul(ps, ps), -1.0 * one)
    for mu in range(4):
        err = max(err, _pc(al.mul(ps, E[mu]), al.mul(E[mu], ps)))
    out["pseudoscalar"] = err

    pq = al.mul(p, q)
    out["dagger_product"] = _pc(al.dagger(pq), al.mul(al.dagger(q), al.dagger(p)))
    out["bar_product"] = _pc(al.bar(pq), al.mul(al.bar(q), al.bar(p)))
    out["hat_product"] = _pc(al.hat(pq), al.mul(al.hat(p), al.hat(q)))
    out["involutions"] = max(
        _pc(al.dagger(al.dagger(p)), p),
        _pc(al.bar(al.bar(p)), p),
        _pc(al.hat(al.hat(p)), p),
        _pc(al.hat(p), al.dagger(al.bar(p))),
    )
    parts = al.parts(p)
    out["decompositions"] = max(
        _pc(parts["re"] + 1j * parts["im"], p),
        _pc(parts["scalar"] + parts["vector"], p),
        _pc(parts["even"] + parts["odd"], p),
    )
    ppb = al.mul(p, al.bar(p))
    scale = np.maximum(1.0, al.frobenius_norm2(p))
    out["p_bar_p_scalar"] = float(np.max(np.sqrt(np.sum(np.abs(ppb.coeffs[1:]) ** 2, axis=0)) / scale))
    out["det_is_p_bar_p"] = _rel(al.det(p), ppb.coeffs[0])
    out["det_multiplicative"] = _rel(al.det(pq), al.det(p) * al.det(q))
    out["cyclic_scalar"] = _rel(al.scalar_part(pq), al.scalar_part(al.mul(q, p)))
    out["fierz"] = _pc(al.fierz_expand(p), p)

    ev_p, ev_q = al.even(p), al.even(q)
    prod = al.mul(ev_p, ev_q)
    out["even_closure"] = _pc(al.odd(prod), al.Paravector.zeros(n))

    # (bar(p) e^mu hat(p))_nu = (p e_nu p^dagger)^mu
    err = 0.0
    for mu in range(4):
        lhs = al.mul_many(al.bar(p), D[mu], al.hat(p))
        for nu in range(4):
            rhs = al.mul_many(p, E[nu], al.dagger(p))
            err = max(err, _rel(al.coefficient(lhs, nu, lower=True), rhs.coeffs[mu]))
    out["coefficients_lemma"] = err

    # scalar(P bar(p) e^mu hat(p) P) = (p bar(P) p^dagger)^mu
    err = 0.0
    j = al.mul_many(p, al.P_BAR, al.dagger(p))
    for mu in range(4):
        lhs = al.mul_many(al.P, al.bar(p), D[mu], al.hat(p), al.P)
        err = max(err, _rel(al.scalar_part(lhs), j.coeffs[mu]))
    out["lift_lemma"] = err

    out["projector"] = max(
        _pc(al.mul(al.P, al.P), al.P),
        _pc(al.mul(al.P, al.P_BAR), al.Paravector.zeros()),
    )
    return out


def lorentz_laws(rng: np.random.Generator, cases: int) -> dict[str, float]:
    det_err = real_err = fac_err = 0.0
    for _ in range(cases):
        lf = lz.random_lorentz(rng)
        x = al.random_real_paravector(rng)
        y = lz.lorentz_apply(lf, x)
        det_err = max(det_err, _rel(al.det(y), al.det(x)))
        real_err = max(real_err, float(np.max(np.abs(y.coeffs.imag)) / max(1.0, float(np.max(np.abs(y.coeffs))))))
        b, r = lz.factor_boost_rotation(lf)
        fac_err = max(fac_err, _pc(al.mul(b.l, r.l), lf.l))
    return {"det_preserved": det_err, "realness_preserved": real_err, "boost_rotation_factor": fac_err}


def run_suite(cases: int = 10_000, seed: int = 0, lorentz_cases: int | None = None) -> list[LawResult]:
    """All laws over ``cases`` random pairs (and ``cases // 10`` Lorentz factors)."""
    if cases < 0:
        raise ValueError("cases must be nonnegative")
    if cases == 0:
        return []
    rng = np.random.default_rng(seed)
    p = al.random_paravector(rng, (cases,))
    q = al.random_paravector(rng, (cases,))
    nl = max(1, cases // 10) if lorentz_cases is None else lorentz_cases
    res = [LawResult(k, "oracle", v, ORACLE_TOL, cases) for k, v in oracle_laws(p, q).items()]
    res += [LawResult(k, "identity", v, IDENTITY_TOL, cases) for k, v in identity_laws(p, q).items()]
    for k, v in lorentz_laws(rng, nl).items():
        tol = FACTOR_TOL if k == "boost_rotation_factor" else LORENTZ_TOL
        res.append(LawResult(k, "lorentz", v, tol, nl))
    return res


__all__ = ["LawResult", "oracle_laws", "identity_laws", "lorentz_laws", "run_suite"]
