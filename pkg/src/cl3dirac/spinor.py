"""Pointwise physics of the nonlinear Dirac equation

    grad(hat phi) + i (q A + m V) hat(phi) e_3 = 0,   V = J / N,
    J = phi phi^dagger,  N = |det phi|,

its lambda-regularization and its plane-wave solutions.

Natural units ``c = hbar = 1``; ``m`` is an inverse length.  Spacetime points
are 4-arrays ``(x^0, x^1, x^2, x^3)`` with ``x^0 = t``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    DUAL_BASIS,
    E0,
    E3,
    METRIC_SIGNS,
    Paravector,
    dagger,
    det,
    frobenius_norm2,
    hat,
    mul,
)
from .errors import DegenerateJ, InconsistentPair, NodalPoint

EPS_NODE = 1e-12


@dataclass(frozen=True)
class PhysicsParams:
    m: float = 1.0
    q: float = 0.0
    lam: float = 0.1

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("m must be nonnegative")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")


def nonlinearity_N(phi: Paravector):
    return np.abs(det(phi))


def dirac_current(phi: Paravector) -> Paravector:
    """``J = phi phi^dagger``; Hermitian psd, so its coefficients are real."""
    j = mul(phi, dagger(phi))
    return Paravector(j.coeffs.real.astype(np.complex128))


def chiral_currents(phi: Paravector) -> tuple[Paravector, Paravector]:
    """``(j_L, j_R) = (phi P phi^dagger, phi bar(P) phi^dagger)``."""
    from .algebra import P, P_BAR

    jl = mul(mul(phi, P), dagger(phi))
    jr = mul(mul(phi, P_BAR), dagger(phi))
    return (
        Paravector(jl.coeffs.real.astype(np.complex128)),
        Paravector(jr.coeffs.real.astype(np.complex128)),
    )


def node_mask(phi: Paravector, eps_node: float = EPS_NODE) -> np.ndarray:
    """True where ``N <= eps_node * ||phi||^2`` (including ``phi = 0``)."""
    return nonlinearity_N(phi) <= eps_node * frobenius_norm2(phi)


def pilot_velocity(phi: Paravector, eps_node: float = EPS_NODE) -> Paravector:
    """``V = J / N`` with ``det V = 1``; raises :class:`NodalPoint` at nodes."""
    if np.any(node_mask(phi, eps_node)):
        raise NodalPoint("N vanishes; pilot velocity undefined")
    return dirac_current(phi) * (1.0 / nonlinearity_N(phi))


def gamma(A: Paravector, V: Paravector, params: PhysicsParams) -> Paravector:
    """``Gamma = q A + m V``."""
    return params.q * A + params.m * V


def reg_velocity(phi: Paravector, lam: float):
    """``det(phi)^* / (N + lam ||phi||^2)`` with ``V_lam(0) = 0``.

    ``||.||`` is the Frobenius norm of the matrix form; with ``lam = 0`` this is
    the phase factor ``e^{-i beta}`` of ``det(phi) = N e^{i beta}``.
    """
    # V_lam is invariant under phi -> t phi; rescale so tiny phi does not underflow
    c = phi.coeffs
    amax = np.max(np.abs(c), axis=0)
    phi = Paravector(c / np.where(amax > 0, amax, 1.0))
    d = det(phi)
    den = np.abs(d) + lam * frobenius_norm2(phi)
    safe = np.where(den > 0, den, 1.0)
    return np.where(den > 0, np.conj(d) / safe, 0.0)


def reg_source(phi: Paravector, lam: float) -> Paravector:
    """``F_lam(phi) = (V_lam(phi) - 1) phi``."""
    return (reg_velocity(phi, lam) - 1.0) * phi


def nonlinear_residual(
    phi: Paravector,
    dphi_hat: list[Paravector] | tuple[Paravector, ...],
    A: Paravector,
    params: PhysicsParams,
    mode: str = "exact",
    eps_node: float = EPS_NODE,
) -> Paravector:
    """Left side of the field equation at given ``phi`` and ``d_mu hat(phi)``.

    ``mode="exact"`` evaluates ``grad hat(phi) + i (qA + mV) hat(phi) e_3``;
    ``mode="regularized"`` uses ``i (q A hat(phi) + m V_lam(phi) phi) e_3``;
    ``mode="linear"`` uses ``i (q A hat(phi) + m phi) e_3``.
    """
    grad = Paravector.zeros(phi.batch_shape)
    for mu in range(4):
        grad = grad + mul(DUAL_BASIS[mu], dphi_hat[mu])
    ph = hat(phi)
    if mode == "exact":
        V = pilot_velocity(phi, eps_node)
        inner = mul(gamma(A, V, params), ph)
    elif mode == "regularized":
        inner = params.q * mul(A, ph) + params.m * (reg_velocity(phi, params.lam) * phi)
    elif mode == "linear":
        inner = params.q * mul(A, ph) + params.m * phi
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return grad + 1j * mul(inner, E3)


@dataclass(frozen=True)
class PotentialSpec:
    """Time-independent external potential ``A = A^0 + A^k e_k`` (upper components).

    ``kind="zero"`` ignores ``values``; ``"constant"`` takes four reals;
    ``"sampled"`` takes real coefficients of shape ``(4, nx, ny, nz)``.
    """

    kind: str = "zero"
    values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "sampled"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "zero":
            object.__setattr__(self, "values", np.zeros(4))
            return
        v = np.asarray(self.values)
        if np.iscomplexobj(v):
            if np.any(v.imag != 0):
                raise ValueError("potential coefficients must be real")
            v = v.real
        v = v.astype(float)
        if v.shape[:1] != (4,) or (self.kind == "constant" and v.shape != (4,)):
            raise ValueError(f"bad potential shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite potential")
        object.__setattr__(self, "values", v)

    @property
    def is_constant(self) -> bool:
        if self.kind != "sampled":
            return True
        v = self.values.reshape(4, -1)
        return bool(np.all(v == v[:, :1]))

    def constant_value(self) -> np.ndarray:
        if not self.is_constant:
            raise ValueError("potential is not spatially constant")
        return self.values.reshape(4, -1)[:, 0].copy()

    def on_grid(self, shape) -> Paravector:
        v = self.values
        if v.ndim == 1:
            v = np.broadcast_to(v.reshape(4, 1, 1, 1), (4, *shape))
        elif v.shape[1:] != tuple(shape):
            raise ValueError(f"potential grid {v.shape[1:]} does not match {tuple(shape)}")
        return Paravector(np.array(v, dtype=np.complex128))

    def within_bound(self, params: "PhysicsParams") -> bool:
        """``|q A_0| <= m`` everywhere."""
        return bool(np.all(np.abs(params.q * self.values[0]) <= params.m))


# plane waves -------------------------------------------------------------


def plane_wave_phase(V: Paravector, m: float, phi0: float, x, qA=None) -> np.ndarray:
    """``(m V_mu + q A_mu) x^mu + phi0`` for spacetime points ``x`` of shape ``(4, ...)``.

    ``qA`` holds the upper components of ``q A`` for a constant potential
    (omit for ``A = 0``).
    """
    x = np.asarray(x, dtype=float)
    k = wave_covector(V, m, qA)
    return np.tensordot(k, x, axes=(0, 0)) + phi0


def wave_covector(V: Paravector, m: float, qA=None) -> np.ndarray:
    """Lower components ``m V_mu + q A_mu`` of the phase gradient."""
    k = m * V.coeffs.real * METRIC_SIGNS
    if qA is not None:
        k = k + np.asarray(qA, dtype=float) * METRIC_SIGNS
    return k


def _exp_e3(angle) -> Paravector:
    """``exp(-i angle e_3) = cos(angle) - i sin(angle) e_3``."""
    angle = np.asarray(angle, dtype=float)
    z = np.zeros_like(angle)
    return Paravector.from_coeffs(np.cos(angle), z, z, -1j * np.sin(angle))


@dataclass(frozen=True)
class PlaneWaveSpec:
    """``phi(x) = M exp(-i theta(x) e_3)`` with ``V = M M^dagger / |det M|``.

    ``theta = (m V_mu + q A_mu) x^mu + phi0``; ``qA`` (upper components of
    ``q A``, default zero) accommodates a constant external potential.
    """

    M: Paravector
    phi0: float = 0.0
    qA: tuple = (0.0, 0.0, 0.0, 0.0)
    N: float = field(init=False)
    J: Paravector = field(init=False)
    V: Paravector = field(init=False)

    def __post_init__(self):
        n = float(nonlinearity_N(self.M))
        if not n > 0:
            raise NodalPoint("plane-wave prefactor M must have det(M) != 0")
        j = dirac_current(self.M)
        object.__setattr__(self, "qA", tuple(float(a) for a in self.qA))
        object.__setattr__(self, "N", n)
        object.__setattr__(self, "J", j)
        object.__setattr__(self, "V", j * (1.0 / n))

    @classmethod
    def from_current(
        cls, N: float, J: Paravector, phi0: float = 0.0, beta: float = 0.0, qA=(0.0, 0.0, 0.0, 0.0)
    ) -> "PlaneWaveSpec":
        """Hermitian representative from ``(N, J)`` times the global phase ``e^{i beta/2}``."""
        return cls(np.exp(0.5j * beta) * reconstruct_M(N, J), phi0, qA)

    def covector(self, m: float) -> np.ndarray:
        return wave_covector(self.V, m, self.qA)

    def phase(self, x, m: float) -> np.ndarray:
        return plane_wave_phase(self.V, m, self.phi0, x, self.qA)

    def eval(self, x, m: float) -> Paravector:
        return plane_wave_eval(self, x, m)

    def derivatives(self, x, m: float) -> list[Paravector]:
        """Analytic ``d_mu phi`` for ``mu = 0..3``."""
        phi = plane_wave_eval(self, x, m)
        k = self.covector(m)
        phi_e3 = mul(phi, E3)
        return [(-1j * k[mu]) * phi_e3 for mu in range(4)]


def plane_wave_eval(spec: PlaneWaveSpec, x, m: float) -> Paravector:
    return mul(spec.M, _exp_e3(spec.phase(x, m)))


def reconstruct_M(N: float, J: Paravector, rtol: float = 1e-10) -> Paravector:
    """Hermitian psd ``M`` with ``M M^dagger = J`` and ``|det M| = N``.

    Takes the ``+`` branch ``M^0 = sqrt((J^0 + N)/2)``, ``M^k = J^k/(2 M^0)``.
    """
    jc = np.asarray(J.coeffs, dtype=np.complex128)
    if np.max(np.abs(jc.imag)) > rtol * max(1.0, np.max(np.abs(jc))):
        raise InconsistentPair("J must have real coefficients")
    j = jc.real
    N = float(N)
    if N < 0:
        raise InconsistentPair("N must be nonnegative")
    detj = j[0] ** 2 - j[1] ** 2 - j[2] ** 2 - j[3] ** 2
    scale = max(j[0] ** 2, N**2, np.finfo(float).tiny)
    if abs(detj - N**2) > rtol * scale or j[0] < -rtol * abs(j[0]):
        raise InconsistentPair(f"det(J) = {float(detj)!r} but N^2 = {N**2!r}")
    s = j[0] + N
    if s <= 0:
        if np.all(j == 0):
            return Paravector.zeros()
        raise DegenerateJ("J^0 + N = 0 for nonzero J")
    m0 = np.sqrt(s / 2)
    return Paravector.from_coeffs(m0, j[1] / (2 * m0), j[2] / (2 * m0), j[3] / (2 * m0))


def velocity_current(V_spatial, N: float = 1.0) -> tuple[float, Paravector]:
    """``(N, J)`` with ``J = N V`` for ``V = sqrt(1 + |v|^2) + v`` (upper components)."""
    v = np.asarray(V_spatial, dtype=float)
    v0 = np.sqrt(1.0 + v @ v)
    return N, Paravector.from_coeffs(N * v0, N * v[0], N * v[1], N * v[2])


def random_psd_pair(rng: np.random.Generator) -> tuple[float, Paravector]:
    """A consistent random ``(N, J)`` built from a random Hermitian psd ``M``."""
    a, d = rng.uniform(0.2, 2.0, size=2)
    bound = np.sqrt(a * d)
    z = bound * rng.uniform(0, 0.95) * np.exp(2j * np.pi * rng.uniform())
    M = Paravector.from_coeffs((a + d) / 2, z.real, z.imag, (a - d) / 2)
    return float(nonlinearity_N(M)), dirac_current(M)


__all__ = [
    "PhysicsParams",
    "PotentialSpec",
    "nonlinearity_N",
    "dirac_current",
    "chiral_currents",
    "pilot_velocity",
    "gamma",
    "reg_velocity",
    "reg_source",
    "nonlinear_residual",
    "plane_wave_phase",
    "wave_covector",
    "plane_wave_eval",
    "PlaneWaveSpec",
    "reconstruct_M",
    "node_mask",
]
