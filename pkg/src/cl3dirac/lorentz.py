"""Lorentz transforms ``p -> l p l^dagger`` with ``l bar(l) = 1``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import E0, Paravector, bar, dagger, det, frobenius_norm2, inverse, mul
from .errors import DegenerateFactor, InvalidLorentzFactor, NullElement
from .matrix import from_matrix, mat_dagger, sqrtm_hermitian_psd, to_matrix

DET_TOL = 1e-12


@dataclass(frozen=True)
class LorentzFactor:
    l: Paravector

    def __post_init__(self):
        # relative to |l|^2 / 2 so that large rapidities remain admissible
        scale = np.maximum(1.0, 0.5 * frobenius_norm2(self.l))
        if np.any(np.abs(det(self.l) - 1.0) > DET_TOL * scale):
            raise InvalidLorentzFactor(f"det(l) = {det(self.l)} != 1")


def _unit(v: np.ndarray) -> tuple[float, np.ndarray]:
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    return n, (v / n if n > 0 else np.zeros(3))


def boost(w) -> LorentzFactor:
    """``cosh(w/2) + w_hat sinh(w/2)`` for rapidity vector ``w``."""
    n, u = _unit(w)
    return LorentzFactor(Paravector.from_vector(u * np.sinh(n / 2), np.cosh(n / 2)))


def rotation(theta) -> LorentzFactor:
    """``cos(theta/2) - i theta_hat sin(theta/2)``: rotation by angle ``|theta|``."""
    n, u = _unit(theta)
    return LorentzFactor(Paravector.from_vector(-1j * u * np.sin(n / 2), np.cos(n / 2)))


def exp(p: Paravector) -> Paravector:
    """Power-series exponential of a general element.

    Writing ``p = c + w`` (complex scalar plus complex vector) the series sums
    to ``e^c (cosh(s) + w sinh(s)/s)`` with ``s^2 = w.w``.
    """
    c = p.coeffs[0]
    w = p.coeffs[1:]
    s = np.sqrt(np.sum(w * w, axis=0).astype(np.complex128))
    small = np.abs(s) < 1e-8
    s_safe = np.where(small, 1.0, s)
    shc = np.where(small, 1.0 + s * s / 6.0, np.sinh(s_safe) / s_safe)
    ch = np.cosh(s)
    ec = np.exp(c)
    return Paravector(np.concatenate([(ec * ch)[None], ec * shc * w]))


def lorentz_apply(lf: LorentzFactor, p: Paravector) -> Paravector:
    l = lf.l
    return mul(mul(l, p), dagger(l))


def factor_boost_rotation(lf: LorentzFactor) -> tuple[LorentzFactor, LorentzFactor]:
    """Split ``l = b r`` with ``b = (l l^dagger)^(1/2)`` real and ``r = bar(b) l`` even."""
    h = to_matrix(mul(lf.l, dagger(lf.l)))
    root = sqrtm_hermitian_psd(h)
    if not np.all(np.isfinite(root)):
        raise DegenerateFactor("l l^dagger is singular")
    b = from_matrix(0.5 * (root + mat_dagger(root)))
    b = Paravector(b.coeffs.real.astype(np.complex128))
    try:
        r = mul(inverse(b), lf.l)
    except NullElement as exc:  # pragma: no cover - det(b) = 1 analytically
        raise DegenerateFactor(str(exc)) from exc
    return LorentzFactor(b), LorentzFactor(r)


IDENTITY = LorentzFactor(E0)


def random_lorentz(rng: np.random.Generator, max_rapidity: float = 2.0) -> LorentzFactor:
    w = rng.standard_normal(3)
    w *= rng.uniform(0, max_rapidity) / np.linalg.norm(w)
    th = rng.standard_normal(3)
    th *= rng.uniform(0, 2 * np.pi) / np.linalg.norm(th)
    return LorentzFactor(mul(boost(w).l, rotation(th).l))


__all__ = [
    "LorentzFactor",
    "boost",
    "rotation",
    "exp",
    "lorentz_apply",
    "factor_boost_rotation",
    "IDENTITY",
    "random_lorentz",
]
