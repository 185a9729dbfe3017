"""Numeric space algebra Cl(3).

An element is stored by its four complex coefficients with respect to the
paravector basis ``e_0 = 1, e_1, e_2, e_3``.  The pseudoscalar ``e_1 e_2 e_3``
squares to -1 and is central, so it is identified with the complex unit and
the real eight-dimensional algebra becomes a four-dimensional complex space.

Every :class:`Paravector` may carry a batch shape: ``coeffs`` has shape
``(4, *batch)``.  All operations broadcast over the batch axes, which is how
spinor fields on a grid are represented.

Index convention
----------------
Dual basis vectors are ``e^0 = e_0`` and ``e^k = -e_k``.  Coefficients with a
lower index are obtained with the Minkowski metric ``diag(1, -1, -1, -1)``.
The Levi-Civita symbol ``LEVI_CIVITA[k, l, m]`` is the textbook symbol with all
indices *lower*.  Raising or lowering any single index of it flips the sign,
so e.g. ``eps^{kl}_n = eps_{kln}`` and ``eps^{imn} = -eps_{imn}``.  This is the
only definition site of that rule; see :func:`levi_civita`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import NullElement

ETA = np.diag([1.0, -1.0, -1.0, -1.0])
METRIC_SIGNS = np.array([1.0, -1.0, -1.0, -1.0])

LEVI_CIVITA = np.zeros((3, 3, 3))
for _k, _l, _m in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
    LEVI_CIVITA[_k, _l, _m] = 1.0
    LEVI_CIVITA[_m, _l, _k] = -1.0


def levi_civita(upper: tuple[bool, bool, bool] = (False, False, False)) -> np.ndarray:
    """Levi-Civita symbol with the given index positions.

    ``upper[i]`` marks index ``i`` as raised.  Each raised index contributes a
    factor -1, which reproduces ``eps^{ijk} = -eps_{ijk}``.
    """
    return LEVI_CIVITA * (-1.0) ** sum(bool(u) for u in upper)


Scalar = Union[complex, float, np.ndarray]


def _as_coeffs(c) -> np.ndarray:
    arr = np.asarray(c, dtype=np.complex128)
    if arr.ndim == 0 or arr.shape[0] != 4:
        raise ValueError(f"expected leading axis of length 4, got shape {arr.shape}")
    return arr


def _aligned(p: "Paravector", q: "Paravector") -> tuple[np.ndarray, np.ndarray]:
    """Coefficient arrays of ``p`` and ``q`` broadcast to a common batch shape."""
    a, b = p.coeffs, q.coeffs
    if a.shape == b.shape:
        return a, b
    batch = np.broadcast_shapes(a.shape[1:], b.shape[1:])
    a = a.reshape((4,) + (1,) * (len(batch) - a.ndim + 1) + a.shape[1:])
    b = b.reshape((4,) + (1,) * (len(batch) - b.ndim + 1) + b.shape[1:])
    return np.broadcast_to(a, (4, *batch)), np.broadcast_to(b, (4, *batch))


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.stack(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


@dataclass(frozen=True, eq=False)
class Paravector:
    """A (batch of) Cl(3) element(s) ``c^mu e_mu`` with complex ``c^mu``."""

    coeffs: np.ndarray

    # let ndarray * Paravector dispatch to __rmul__
    __array_ufunc__ = None

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_coeffs(self.coeffs))

    # construction -------------------------------------------------------
    @classmethod
    def from_coeffs(cls, c0=0.0, c1=0.0, c2=0.0, c3=0.0) -> "Paravector":
        parts = np.broadcast_arrays(*(np.asarray(c, dtype=np.complex128) for c in (c0, c1, c2, c3)))
        return cls(np.stack(parts))

    @classmethod
    def scalar_of(cls, z) -> "Paravector":
        z = np.asarray(z, dtype=np.complex128)
        return cls.from_coeffs(z, np.zeros_like(z), np.zeros_like(z), np.zeros_like(z))

    @classmethod
    def from_vector(cls, v, scalar=0.0) -> "Paravector":
        v = np.asarray(v, dtype=np.complex128)
        return cls.from_coeffs(scalar, v[0], v[1], v[2])

    @classmethod
    def zeros(cls, batch: tuple[int, ...] = ()) -> "Paravector":
        return cls(np.zeros((4, *batch), dtype=np.complex128))

    @classmethod
    def basis(cls, mu: int) -> "Paravector":
        c = np.zeros(4, dtype=np.complex128)
        c[mu] = 1.0
        return cls(c)

    @classmethod
    def dual_basis(cls, mu: int) -> "Paravector":
        c = np.zeros(4, dtype=np.complex128)
        c[mu] = METRIC_SIGNS[mu]
        return cls(c)

    # views ----------------------------------------------------------------
    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[1:]

    @property
    def c0(self):
        return self.coeffs[0]

    @property
    def vec(self) -> np.ndarray:
        """Spatial coefficients ``(c^1, c^2, c^3)`` (upper index)."""
        return self.coeffs[1:]

    @property
    def lower(self) -> np.ndarray:
        """Coefficients with lowered index, ``p_mu = eta_{mu nu} p^nu``."""
        return self.coeffs * METRIC_SIGNS.reshape((4,) + (1,) * len(self.batch_shape))

    def __getitem__(self, idx) -> "Paravector":
        if not isinstance(idx, tuple):
            idx = (idx,)
        return Paravector(self.coeffs[(slice(None),) + idx])

    # arithmetic -----------------------------------------------------------
    def _bcast(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.complex128)
        return z[np.newaxis, ...] if z.ndim else z

    def __add__(self, other):
        if isinstance(other, Paravector):
            a, b = _aligned(self, other)
            return Paravector(a + b)
        return self + Paravector.scalar_of(np.broadcast_to(other, self.batch_shape))

    __radd__ = __add__

    def __neg__(self):
        return Paravector(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Paravector):
            return mul(self, other)
        return Paravector(self.coeffs * self._bcast(other))

    def __rmul__(self, other):
        # scalars are central
        return Paravector(self.coeffs * self._bcast(other))

    def __truediv__(self, other):
        if isinstance(other, Paravector):
            return mul(self, inverse(other))
        return Paravector(self.coeffs / self._bcast(other))

    def __matmul__(self, other):
        return mul(self, other)

    def __repr__(self) -> str:
        if self.batch_shape:
            return f"Paravector(batch={self.batch_shape})"
        c = self.coeffs
        return "Paravector(" + ", ".join(f"{z:.6g}" for z in c) + ")"

    # convenience wrappers ---------------------------------------------------
    def dagger(self) -> "Paravector":
        return dagger(self)

    def bar(self) -> "Paravector":
        return bar(self)

    def hat(self) -> "Paravector":
        return hat(self)

    def det(self):
        return det(self)

    def inverse(self) -> "Paravector":
        return inverse(self)

    def norm2(self):
        """Squared Frobenius norm of the matrix representation, ``2 sum |c^mu|^2``."""
        return frobenius_norm2(self)

    def allclose(self, other: "Paravector", atol: float = 1e-12, rtol: float = 0.0) -> bool:
        return bool(np.allclose(self.coeffs, other.coeffs, atol=atol, rtol=rtol))


E0 = Paravector.basis(0)
E1 = Paravector.basis(1)
E2 = Paravector.basis(2)
E3 = Paravector.basis(3)
BASIS = (E0, E1, E2, E3)
DUAL_BASIS = tuple(Paravector.dual_basis(mu) for mu in range(4))
I = Paravector.scalar_of(1j)


def mul(p: Paravector, q: Paravector) -> Paravector:
    """Clifford product.

    With ``p = a + a_vec`` and ``q = b + b_vec`` (complex scalar plus complex
    vector part) and ``e_k e_l = delta_kl + i eps_klm e_m``::

        pq = (a b + a_vec . b_vec) + (a b_vec + b a_vec + i a_vec x b_vec)
    """
    pc, qc = _aligned(p, q)
    a, av = pc[0], pc[1:]
    b, bv = qc[0], qc[1:]
    s = a * b + (av[0] * bv[0] + av[1] * bv[1] + av[2] * bv[2])
    v = a * bv + b * av + 1j * _cross(av, bv)
    return Paravector(np.concatenate([s[np.newaxis], v]))


def mul_many(*factors: Paravector) -> Paravector:
    out = factors[0]
    for f in factors[1:]:
        out = mul(out, f)
    return out


def dagger(p: Paravector) -> Paravector:
    """Complex conjugation ``i -> -i``; the basis vectors are unchanged."""
    return Paravector(np.conj(p.coeffs))


def bar(p: Paravector) -> Paravector:
    """Spatial reversal: flips the sign of the vector part."""
    c = p.coeffs.copy()
    c[1:] *= -1
    return Paravector(c)


def hat(p: Paravector) -> Paravector:
    """Grade automorphism, equal to ``dagger(bar(p))``."""
    c = np.conj(p.coeffs)
    c[1:] *= -1
    return Paravector(c)


def re(p: Paravector) -> Paravector:
    return Paravector(p.coeffs.real.astype(np.complex128))


def im(p: Paravector) -> Paravector:
    return Paravector(p.coeffs.imag.astype(np.complex128))


def even(p: Paravector) -> Paravector:
    return 0.5 * (p + hat(p))


def odd(p: Paravector) -> Paravector:
    return 0.5 * (p - hat(p))


def scalar(p: Paravector) -> Paravector:
    return 0.5 * (p + bar(p))


def vector(p: Paravector) -> Paravector:
    return 0.5 * (p - bar(p))


def parts(p: Paravector) -> dict[str, Paravector]:
    """All six canonical projections of ``p``."""
    return {
        "re": re(p),
        "im": im(p),
        "even": even(p),
        "odd": odd(p),
        "scalar": scalar(p),
        "vector": vector(p),
    }


def scalar_part(p: Paravector):
    """The complex ``e_0`` coefficient."""
    return p.coeffs[0]


def scalar_product(p: Paravector, q: Paravector):
    """``<p, q> = (p bar(q))_0``; symmetric and bilinear (no conjugation)."""
    a, b = _aligned(p, q)
    return a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]


def det(p: Paravector):
    """``p bar(p)``, always a complex scalar; the determinant of the matrix form."""
    c = p.coeffs
    return c[0] * c[0] - c[1] * c[1] - c[2] * c[2] - c[3] * c[3]


def frobenius_norm2(p: Paravector):
    return 2.0 * np.sum(np.abs(p.coeffs) ** 2, axis=0)


def inverse(p: Paravector, eps_rel: float = 1e-14) -> Paravector:
    """``det(p)^-1 bar(p)``.

    Raises :class:`NullElement` when ``|det(p)| <= eps_rel * ||p||^2`` anywhere
    in the batch.
    """
    d = det(p)
    if np.any(np.abs(d) <= eps_rel * frobenius_norm2(p)):
        raise NullElement("element is not invertible (det below threshold)")
    return bar(p) * (1.0 / d)


def fierz_expand(p: Paravector) -> Paravector:
    """``-1/2 sum_mu e^mu bar(p) e_mu``, which reproduces ``p``."""
    pb = bar(p)
    acc = Paravector.zeros(p.batch_shape)
    for mu in range(4):
        acc = acc + mul(mul(DUAL_BASIS[mu], pb), BASIS[mu])
    return -0.5 * acc


def coefficient(p: Paravector, mu: int, lower: bool = False):
    """Coefficient of ``p`` along ``e_mu`` (upper) or ``e^mu`` (lower index)."""
    return p.coeffs[mu] * (METRIC_SIGNS[mu] if lower else 1.0)


P = 0.5 * (E0 + E3)
P_BAR = bar(P)


def projector_P() -> Paravector:
    """The idempotent ``P = (1 + e_3)/2`` generating the left ideal ``Cl(3) P``."""
    return P


def ideal_coeffs(p: Paravector):
    """Coordinates of ``p P`` in the basis ``{P, e_1 P}``, halved.

    Returns ``((p^0 + p^3)/2, (p^1 + i p^2)/2)``, i.e. the ``e_0`` and ``e_1``
    coefficients of ``p P``.
    """
    c = p.coeffs
    return 0.5 * (c[0] + c[3]), 0.5 * (c[1] + 1j * c[2])


def random_paravector(rng: np.random.Generator, batch: tuple[int, ...] = (), scale: float = 1.0) -> Paravector:
    """Gaussian coefficients (real and imaginary parts i.i.d.)."""
    shape = (4, *batch)
    return Paravector(scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)))


def random_real_paravector(rng: np.random.Generator, batch: tuple[int, ...] = (), scale: float = 1.0) -> Paravector:
    return Paravector(scale * rng.standard_normal((4, *batch)).astype(np.complex128))
