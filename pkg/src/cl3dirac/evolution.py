"""Time stepping of the linear, regularized and exact field equations.

The state is ``phi``; with ``F_lam(phi) = (V_lam - 1) phi`` the regularized
equation reads ``i d_0 hat(phi) = H hat(phi) + m F_lam(phi) e_3`` where

    H hat(phi) = -i e^k d_k hat(phi) + q A hat(phi) e_3 + m phi e_3.

Solved for ``d_0 phi`` this is

    d_0 phi = -e_k d_k phi - i (q hat(A) phi + m W) e_3,

with ``W = hat(phi)`` (linear), ``conj(V_lam) hat(phi)`` (regularized) or
``conj(V_0) hat(phi) = bar(V) phi`` (exact).

For the split-step scheme the field is mapped to the complex-linear pair
``psi = (xi, eta)``: ``xi`` is the first column of the matrix form of ``phi``
and ``eta`` the first column of ``hat(phi)``.  In these variables the linear
part is ``d_0 psi = -i H(kappa) psi`` with the Hermitian Fourier symbol

    H(kappa) = [[ s.k + q(A_0 + A_k s_k),  m                         ],
                [ m,                      -s.k + q(A_0 - A_k s_k)     ]]

(``s`` the Pauli matrices, ``A_k`` lower components), and the source is the
pointwise rotation ``d_0 xi = -i m c^* eta``, ``d_0 eta = -i m c xi`` with
``c = V_lam - 1``.  Both substeps are unitary.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .algebra import BASIS, E3, Paravector, frobenius_norm2, hat, mul
from .errors import BlowUp, GrowthViolation, NodalPoint
from .grid import DERIVATIVES, Grid, SpinorField, gradient, integrate, norms
from .matrix import SIGMA
from .spinor import EPS_NODE, PhysicsParams, PotentialSpec, node_mask, reg_source, reg_velocity

log = logging.getLogger(__name__)

MODES = ("linear", "nonlinear-regularized", "nonlinear-exact")
METHODS = ("strang-split", "rk4")


@dataclass(frozen=True)
class SchemeConfig:
    dt: float | None = None
    t_end: float = 1.0
    method: str = "strang-split"
    derivative: str = "spectral"
    mode: str = "nonlinear-regularized"
    c_cfl: float = 0.5
    growth_tol: float = 1e-6
    dt_factor: float = 0.25

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.derivative not in DERIVATIVES:
            raise ValueError(f"derivative must be one of {DERIVATIVES}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end >= 0:
            raise ValueError("t_end must be nonnegative")
        if not self.c_cfl > 0 or not self.growth_tol >= 0 or not self.dt_factor > 0:
            raise ValueError("c_cfl, dt_factor must be positive and growth_tol nonnegative")

    def resolve(self, grid: Grid) -> "SchemeConfig":
        """Fill in the default ``dt`` and warn when the CFL bound is exceeded."""
        h = float(np.min(grid.spacing))
        out = self if self.dt is not None else replace(self, dt=self.dt_factor * h)
        if out.dt > out.c_cfl * h:
            msg = f"dt = {out.dt:.3g} exceeds c_cfl * min_spacing = {out.c_cfl * h:.3g}"
            log.warning(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
        return out

    def n_steps(self) -> int:
        if self.dt is None:
            raise ValueError("unresolved dt")
        return int(math.ceil(self.t_end / self.dt - 1e-9))

    @property
    def lam_mode(self) -> str:
        return {"linear": "linear", "nonlinear-regularized": "regularized", "nonlinear-exact": "exact"}[self.mode]


# phi <-> psi ------------------------------------------------------------


def to_psi(c: np.ndarray) -> np.ndarray:
    """Coefficients ``(4, ...)`` to ``(xi_1, xi_2, eta_1, eta_2)``."""
    a = c[0] + c[3]
    cc = c[1] + 1j * c[2]
    b = c[1] - 1j * c[2]
    d = c[0] - c[3]
    return np.stack([a, cc, np.conj(d), -np.conj(b)])


def from_psi(psi: np.ndarray) -> np.ndarray:
    a, cc = psi[0], psi[1]
    d = np.conj(psi[2])
    b = -np.conj(psi[3])
    return np.stack([(a + d) / 2, (cc + b) / 2, (cc - b) / 2j, (a - d) / 2])


# right-hand sides -------------------------------------------------------


def _source_W(phi: Paravector, params: PhysicsParams, mode: str, eps_node: float) -> Paravector:
    ph = hat(phi)
    if mode == "linear":
        return ph
    if mode == "exact":
        if np.any(node_mask(phi, eps_node)):
            raise NodalPoint("N vanishes on the grid; exact mode cannot continue")
        return np.conj(reg_velocity(phi, 0.0)) * ph
    return np.conj(reg_velocity(phi, params.lam)) * ph


def rhs(
    c: np.ndarray,
    grid: Grid,
    A: Paravector,
    params: PhysicsParams,
    mode: str = "regularized",
    derivative: str = "spectral",
    eps_node: float = EPS_NODE,
) -> np.ndarray:
    """``d_0 phi`` for coefficients ``c`` of shape ``(4, nx, ny, nz)``."""
    phi = Paravector(c)
    out = np.zeros_like(c)
    for k, d in enumerate(gradient(c, grid, derivative)):
        out -= mul(BASIS[k + 1], Paravector(d)).coeffs
    src = params.q * mul(hat(A), phi) + params.m * _source_W(phi, params, mode, eps_node)
    out -= 1j * mul(src, E3).coeffs
    return out


def hamiltonian_apply(
    field: SpinorField, A: Paravector, params: PhysicsParams, derivative: str = "spectral"
) -> Paravector:
    """``H hat(phi)`` for the state ``phi`` of ``field`` (returns a grid Paravector).

    H is real-linear in ``hat(phi)``; it is symmetric for the real inner
    product ``Re <X, Y> = Re sum tr(X^dagger Y) dV``.
    """
    ph = hat(field.data)
    out = Paravector.zeros(field.grid.n)
    for k, d in enumerate(gradient(ph.coeffs, field.grid, derivative)):
        # -i e^k d_k = +i e_k d_k
        out = out + 1j * mul(BASIS[k + 1], Paravector(d))
    return out + mul(params.q * mul(A, ph) + params.m * field.data, E3)


# split-step pieces --------------------------------------------------------


def linear_symbol(grid: Grid, derivative: str, A0: np.ndarray, params: PhysicsParams) -> np.ndarray:
    """``H(kappa)`` of shape ``(nx, ny, nz, 4, 4)`` for a constant potential ``A0`` (upper)."""
    ks = grid.symbols(derivative)
    kappa = np.stack(np.broadcast_arrays(*ks))  # (3, nx, ny, nz)
    sk = np.einsum("k...,kij->...ij", kappa, SIGMA[1:])
    a_low = np.array([A0[0], -A0[1], -A0[2], -A0[3]], dtype=float)
    pot_plus = params.q * (a_low[0] * SIGMA[0] + np.einsum("k,kij->ij", a_low[1:], SIGMA[1:]))
    pot_minus = params.q * (a_low[0] * SIGMA[0] - np.einsum("k,kij->ij", a_low[1:], SIGMA[1:]))
    H = np.zeros(grid.n + (4, 4), dtype=np.complex128)
    H[..., :2, :2] = sk + pot_plus
    H[..., 2:, 2:] = -sk + pot_minus
    H[..., :2, 2:] = params.m * SIGMA[0]
    H[..., 2:, :2] = params.m * SIGMA[0]
    return H


def linear_propagator(H: np.ndarray, tau: float) -> np.ndarray:
    """``exp(-i tau H)`` per wavevector via the Hermitian eigendecomposition."""
    w, Q = np.linalg.eigh(H)
    return (Q * np.exp(-1j * tau * w)[..., None, :]) @ np.conj(np.swapaxes(Q, -1, -2))


def apply_propagator(U: np.ndarray, psi: np.ndarray) -> np.ndarray:
    f = np.fft.fftn(psi, axes=(1, 2, 3))
    f = np.einsum("...ij,j...->i...", U, f)
    return np.fft.ifftn(f, axes=(1, 2, 3))


def _rotate(psi: np.ndarray, cv: np.ndarray, tau: float, m: float) -> np.ndarray:
    """Exact flow of ``xi' = -i m c^* eta``, ``eta' = -i m c xi`` over ``tau`` for frozen ``c``."""
    a = np.abs(cv)
    th = m * a * tau
    cs = np.cos(th)
    sn = np.where(a > 0, np.sin(th) / np.where(a > 0, a, 1.0), m * tau)
    xi, eta = psi[:2], psi[2:]
    return np.concatenate([cs * xi - 1j * sn * np.conj(cv) * eta, cs * eta - 1j * sn * cv * xi])


def _velocity_from_psi(psi: np.ndarray, lam: float, mode: str, eps_node: float) -> np.ndarray:
    phi = Paravector(from_psi(psi))
    if mode == "exact":
        if np.any(node_mask(phi, eps_node)):
            raise NodalPoint("N vanishes on the grid; exact mode cannot continue")
        return reg_velocity(phi, 0.0)
    return reg_velocity(phi, lam)


def nonlinear_substep(psi: np.ndarray, tau: float, params: PhysicsParams, mode: str, eps_node: float) -> np.ndarray:
    """Second-order midpoint flow of the pointwise source term."""
    if mode == "linear" or params.m == 0:
        return psi
    c0 = _velocity_from_psi(psi, params.lam, mode, eps_node) - 1.0
    half = _rotate(psi, c0, tau / 2, params.m)
    cm = _velocity_from_psi(half, params.lam, mode, eps_node) - 1.0
    return _rotate(psi, cm, tau, params.m)


# stepping -----------------------------------------------------------------


@dataclass
class Stepper:
    """Prepared one-step map for a fixed grid, potential, physics and scheme."""

    grid: Grid
    potential: PotentialSpec
    params: PhysicsParams
    scheme: SchemeConfig
    eps_node: float = EPS_NODE
    method: str = field(init=False)
    _U: np.ndarray | None = field(init=False, default=None, repr=False)
    _A: Paravector = field(init=False, repr=False)

    def __post_init__(self):
        if self.scheme.dt is None:
            self.scheme = self.scheme.resolve(self.grid)
        self._A = self.potential.on_grid(self.grid.n)
        self.method = self.scheme.method
        if self.method == "strang-split" and not self.potential.is_constant:
            log.info("potential is not constant; falling back to rk4")
            self.method = "rk4"
        if not self.potential.within_bound(self.params):
            log.warning("|q A_0| exceeds m somewhere")
        if self.method == "strang-split":
            H = linear_symbol(self.grid, self.scheme.derivative, self.potential.constant_value(), self.params)
            self._U = linear_propagator(H, self.scheme.dt)

    @property
    def A(self) -> Paravector:
        return self._A

    def rhs(self, c: np.ndarray) -> np.ndarray:
        return rhs(c, self.grid, self._A, self.params, self.scheme.lam_mode, self.scheme.derivative, self.eps_node)

    def __call__(self, c: np.ndarray) -> np.ndarray:
        dt = self.scheme.dt
        if self.method == "strang-split":
            mode = self.scheme.lam_mode
            psi = to_psi(c)
            psi = nonlinear_substep(psi, dt / 2, self.params, mode, self.eps_node)
            psi = apply_propagator(self._U, psi)
            psi = nonlinear_substep(psi, dt / 2, self.params, mode, self.eps_node)
            out = from_psi(psi)
        else:
            k1 = self.rhs(c)
            k2 = self.rhs(c + dt / 2 * k1)
            k3 = self.rhs(c + dt / 2 * k2)
            k4 = self.rhs(c + dt * k3)
            out = c + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(out)):
            raise BlowUp("non-finite coefficients after step")
        return out


def step(field: SpinorField, potential: PotentialSpec, params: PhysicsParams, scheme: SchemeConfig) -> SpinorField:
    """Advance ``field`` by one time step (prepares the propagator each call)."""
    st = Stepper(field.grid, potential, params, scheme)
    return field.with_data(Paravector(st(field.data.coeffs)), field.t + st.scheme.dt)


@dataclass
class Trajectory:
    snapshots: list[SpinorField]
    records: list[dict]
    scheme: SchemeConfig

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def final(self) -> SpinorField:
        return self.snapshots[-1]


Observer = Callable[[SpinorField, dict], None]


def source_ratio(field: SpinorField, params: PhysicsParams) -> float:
    """``||F_lam(phi)||_L2 / ||phi||_L2`` (bounded by 2)."""
    n = integrate(frobenius_norm2(field.data), field.grid)
    if n == 0:
        return 0.0
    f = integrate(frobenius_norm2(reg_source(field.data, params.lam)), field.grid)
    return float(np.sqrt(f / n))


def evolve(
    field0: SpinorField,
    potential: PotentialSpec,
    params: PhysicsParams,
    scheme: SchemeConfig,
    stride: int = 1,
    observers: tuple[Observer, ...] = (),
    keep: bool = True,
) -> Trajectory:
    """Run to ``t_end`` keeping every ``stride``-th state (and the last one).

    The final step is shortened so that the run ends exactly at ``t_end``.
    Raises :class:`GrowthViolation` if the L2 norm leaves the ``exp(2 m t)``
    envelope and :class:`BlowUp` on non-finite values.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    scheme = scheme.resolve(field0.grid)
    st = Stepper(field0.grid, potential, params, scheme)
    n0 = norms(field0, scheme.derivative)["l2"]
    nsteps = scheme.n_steps()
    t0 = field0.t
    c = field0.data.coeffs.copy()
    snaps = [field0] if keep else []
    records = []

    def record(i: int, fld: SpinorField) -> dict:
        nm = norms(fld, scheme.derivative)
        tt = fld.t - t0
        env = n0 * math.exp(2 * params.m * tt)
        rec = {
            "step": i,
            "t": fld.t,
            "l2": nm["l2"],
            "h1": nm["h1"],
            "envelope_ratio": nm["l2"] / env if env > 0 else 0.0,
        }
        if scheme.mode != "linear":
            rec["source_ratio"] = source_ratio(fld, params)
        records.append(rec)
        log.debug("step=%d t=%.6g l2=%.15g h1=%.6g envelope_ratio=%.12g", i, fld.t, nm["l2"], nm["h1"], rec["envelope_ratio"])
        for ob in observers:
            ob(fld, rec)
        if nm["l2"] > env * (1 + scheme.growth_tol):
            raise GrowthViolation(f"L2 norm {nm['l2']:.6g} exceeds envelope {env:.6g} at t={fld.t:.6g}")
        return rec

    record(0, field0)
    last_dt = scheme.t_end - (nsteps - 1) * scheme.dt
    short = None
    if nsteps > 0 and abs(last_dt - scheme.dt) > 1e-12 * scheme.dt:
        short = Stepper(field0.grid, potential, params, replace(scheme, dt=last_dt))
    t = t0
    for i in range(1, nsteps + 1):
        if i == nsteps and short is not None:
            c = short(c)
            t = t0 + scheme.t_end
        else:
            c = st(c)
            t = t0 + i * scheme.dt
        if i % stride == 0 or i == nsteps:
            fld = SpinorField(field0.grid, Paravector(c), t)
            record(i, fld)
            if keep:
                snaps.append(fld)
    if not keep:
        snaps = [SpinorField(field0.grid, Paravector(c), t)]
    return Trajectory(snaps, records, scheme)


__all__ = [
    "MODES",
    "METHODS",
    "SchemeConfig",
    "Stepper",
    "Trajectory",
    "to_psi",
    "from_psi",
    "rhs",
    "hamiltonian_apply",
    "linear_symbol",
    "linear_propagator",
    "nonlinear_substep",
    "step",
    "evolve",
    "source_ratio",
]
