"""Pauli-matrix representation of Cl(3) as complex 2x2 matrices.

This is a second, independent implementation of the algebra: products are
matrix products, spatial reversal is the adjugate, the determinant is
``AD - BC``.  It is used as a test oracle and for the 2x2 square root needed
by the boost/rotation factorization.  Arrays have shape ``(..., 2, 2)``.
"""
from __future__ import annotations

import numpy as np

from .algebra import Paravector

SIGMA = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=np.complex128,
)


def to_matrix(p: Paravector) -> np.ndarray:
    c = p.coeffs
    m = np.empty(c.shape[1:] + (2, 2), dtype=np.complex128)
    m[..., 0, 0] = c[0] + c[3]
    m[..., 0, 1] = c[1] - 1j * c[2]
    m[..., 1, 0] = c[1] + 1j * c[2]
    m[..., 1, 1] = c[0] - c[3]
    return m


def from_matrix(m: np.ndarray) -> Paravector:
    m = np.asarray(m, dtype=np.complex128)
    a, b, c, d = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
    return Paravector(np.stack([(a + d) / 2, (c + b) / 2, (c - b) / 2j, (a - d) / 2]))


def mat_dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def adjugate(m: np.ndarray) -> np.ndarray:
    """For 2x2 matrices the adjugate is an entry shuffle: [[D, -B], [-C, A]]."""
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 0, 1] = -m[..., 0, 1]
    out[..., 1, 0] = -m[..., 1, 0]
    out[..., 1, 1] = m[..., 0, 0]
    return out


def mat_hat(m: np.ndarray) -> np.ndarray:
    return mat_dagger(adjugate(m))


def mat_det(m: np.ndarray) -> np.ndarray:
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def mat_scalar_product(m: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Half the trace of ``M adj(N)``."""
    return 0.5 * np.trace(m @ adjugate(n), axis1=-2, axis2=-1)


def mat_inverse(m: np.ndarray) -> np.ndarray:
    return np.linalg.inv(m)


def sqrtm_hermitian_psd(h: np.ndarray) -> np.ndarray:
    """Principal square root of Hermitian positive semidefinite 2x2 matrices.

    Uses ``sqrt(H) = (H + s 1) / sqrt(tr H + 2 s)`` with ``s = sqrt(det H)``,
    which follows from Cayley-Hamilton.  Returns ``nan`` where the trace term
    vanishes (``H = 0``).
    """
    s = np.sqrt(np.maximum(mat_det(h).real, 0.0))
    t = np.trace(h, axis1=-2, axis2=-1).real + 2.0 * s
    eye = np.eye(2, dtype=np.complex128)
    with np.errstate(divide="ignore", invalid="ignore"):
        return (h + s[..., None, None] * eye) / np.sqrt(t)[..., None, None]
