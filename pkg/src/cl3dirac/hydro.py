"""Currents, the Tetrode tensor, hydrodynamic fields and law residuals.

Sectors
-------
``"R"`` uses the projector ``P`` in the Tetrode tensor and the chiral current
``j_R = phi bar(P) phi^dagger``; ``"L"`` uses ``bar(P)``, ``j_L = phi P phi^dagger``
and the coupling ``-Gamma`` (because ``e_3 bar(P) = -bar(P)``).  The sector sign
``s = +1 / -1`` multiplies ``Gamma`` and hence ``G`` everywhere.

Index placement
---------------
Arrays named ``*_low`` carry lower spacetime indices; everything else is
upper.  ``T[nu, mu]`` stores ``T_nu^mu``.  ``p[n] = T_n^0`` (lower); the
three-vector ``bold_p`` used in cross products has upper components
``p^n = -p_n``, and the printed momentum balance is evaluated for these upper
components.  Levi-Civita symbols come from :func:`cl3dirac.algebra.levi_civita`.

Time derivatives of snapshot quantities use central differences over a window
of equally spaced snapshots (three by default, second order).  Single-snapshot quantities
that need ``d_0 phi`` (Tetrode trace) take it from the exact equation of
motion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import (
    BASIS,
    DUAL_BASIS,
    ETA,
    METRIC_SIGNS,
    P,
    P_BAR,
    Paravector,
    bar,
    dagger,
    hat,
    levi_civita,
    mul,
    scalar_product,
)
from .errors import InsufficientSnapshots
from .evolution import rhs
from .grid import Grid, SpinorField, partial
from .spinor import EPS_NODE, PhysicsParams, PotentialSpec, dirac_current, nonlinearity_N, node_mask

SECTORS = ("R", "L")
SECTOR_SIGN = {"R": 1.0, "L": -1.0}
EPS_HYDRO = 1e-10

EPS_UP_UP_LOW = levi_civita((True, True, False))  # eps^{kl}_n
EPS_UP = levi_civita((True, True, True))  # eps^{imn}
EPS = levi_civita()  # eps_{ijk}, textbook cross product


def _proj(sector: str) -> tuple[Paravector, Paravector]:
    """(Tetrode projector, current projector) for a sector."""
    if sector == "R":
        return P, P_BAR
    if sector == "L":
        return P_BAR, P
    raise ValueError(f"unknown sector {sector!r}")


def lower(upper_components: np.ndarray) -> np.ndarray:
    """Lower the leading (length-4) spacetime index."""
    s = METRIC_SIGNS.reshape((4,) + (1,) * (upper_components.ndim - 1))
    return upper_components * s


def cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``(a x b)^i = eps_{ijk} a^j b^k`` over the leading axis."""
    return np.einsum("ijk,j...,k...->i...", EPS, a, b)


# currents -----------------------------------------------------------------


@dataclass(frozen=True)
class CurrentSet:
    D: np.ndarray  # D[kappa, mu] = D_kappa^mu
    j_L: np.ndarray
    j_R: np.ndarray

    def sector(self, s: str) -> np.ndarray:
        return self.j_R if s == "R" else self.j_L


def sector_current(phi: Paravector, sector: str) -> np.ndarray:
    _, pc = _proj(sector)
    return mul(mul(phi, pc), dagger(phi)).coeffs.real


def currents(phi: Paravector) -> CurrentSet:
    """``D_kappa = phi e_kappa phi^dagger`` and the two chiral currents."""
    phd = dagger(phi)
    D = np.stack([mul(mul(phi, BASIS[k]), phd).coeffs.real for k in range(4)])
    return CurrentSet(D, sector_current(phi, "L"), sector_current(phi, "R"))


def orthogonality_defect(phi: Paravector) -> np.ndarray:
    """``max_{mu,nu} |<D_mu, D_nu> - N^2 eta_{mu nu}| / (J^0)^2`` per point.

    ``(J^0)^2`` is the size of the individual products; dividing by ``N^2``
    instead would amplify roundoff near nodes by ``(J^0 / N)^2``.
    """
    cs = currents(phi)
    n2 = nonlinearity_N(phi) ** 2
    j02 = cs.D[0][0] ** 2
    out = np.zeros(np.shape(n2))
    for a in range(4):
        for b in range(4):
            g = scalar_product(Paravector(cs.D[a]), Paravector(cs.D[b])).real
            out = np.maximum(out, np.abs(g - n2 * ETA[a, b]))
    scale = np.where(j02 > 0, j02, 1.0)
    return out / scale


def density_mask(rho: np.ndarray, eps_rel: float = EPS_HYDRO) -> np.ndarray:
    """True where the sector density is too small for hydro quantities."""
    m = float(np.mean(rho))
    return rho <= eps_rel * m if m > 0 else np.ones(np.shape(rho), bool)


def chiral_lightlike_check(phi: Paravector, eps_rel: float = EPS_HYDRO) -> dict[str, np.ndarray]:
    """``|j_mu j^mu| / (j^0)^2`` per sector, ``nan`` where masked."""
    out = {}
    for s in SECTORS:
        j = sector_current(phi, s)
        jj = np.abs(np.sum(lower(j) * j, axis=0))
        mask = density_mask(j[0], eps_rel)
        out[s] = np.where(mask, np.nan, jj / np.where(mask, 1.0, j[0] ** 2))
    return out


# Gamma and derivatives ----------------------------------------------------


def safe_velocity(phi: Paravector, eps_node: float = EPS_NODE) -> tuple[np.ndarray, np.ndarray]:
    """Pilot velocity ``V = J/N`` (upper, real) with zeros at nodes, and the node mask."""
    J = dirac_current(phi).coeffs.real
    N = nonlinearity_N(phi)
    nodes = node_mask(phi, eps_node)
    V = np.where(nodes, 0.0, J / np.where(nodes, 1.0, N))
    return V, nodes


def gamma_lower(A: Paravector | np.ndarray, V: np.ndarray, params: PhysicsParams) -> np.ndarray:
    a = A.coeffs.real if isinstance(A, Paravector) else np.asarray(A, float)
    a = np.broadcast_to(a.reshape(a.shape + (1,) * (V.ndim - a.ndim)), V.shape)
    return lower(params.q * a + params.m * V)


def field_derivatives(
    field: SpinorField,
    A: Paravector,
    params: PhysicsParams,
    derivative: str = "spectral",
    dphi_dt: np.ndarray | None = None,
) -> list[Paravector]:
    """``[d_0 phi, d_1 phi, d_2 phi, d_3 phi]``.

    Without ``dphi_dt`` the time derivative comes from the exact equation of
    motion, which requires ``N > 0`` everywhere.
    """
    c = field.data.coeffs
    d = [partial(c, k, field.grid, derivative) for k in range(3)]
    if dphi_dt is None:
        dphi_dt = rhs(c, field.grid, A, params, "exact", derivative)
    return [Paravector(dphi_dt)] + [Paravector(x) for x in d]


def tetrode(phi: Paravector, dphi: list[Paravector], gamma_low: np.ndarray, sector: str) -> np.ndarray:
    """``T_nu^mu = Re(Pi bar(phi) e^mu (-i d_nu + s Gamma_nu) hat(phi) Pi)_0``, shape ``(4, 4, ...)``."""
    pt, _ = _proj(sector)
    s = SECTOR_SIGN[sector]
    ph = hat(phi)
    left = [mul(bar(phi), DUAL_BASIS[mu]) for mu in range(4)]
    T = np.empty((4, 4) + phi.batch_shape)
    for nu in range(4):
        X = -1j * hat(dphi[nu]) + (s * gamma_low[nu]) * ph
        for mu in range(4):
            y = mul(mul(pt, mul(left[mu], X)), pt)
            T[nu, mu] = y.coeffs[0].real
    return T


def tetrode_null_form(phi: Paravector, dphi: list[Paravector], gamma_low: np.ndarray, sector: str) -> np.ndarray:
    """Second route: ``-(i/2)(e^mu(d_nu hat(phi) Pi bar(phi) - hat(phi) Pi d_nu bar(phi)))_0 + s Gamma_nu j^mu``."""
    pt, _ = _proj(sector)
    s = SECTOR_SIGN[sector]
    j = sector_current(phi, sector)
    ph, pb = hat(phi), bar(phi)
    T = np.empty((4, 4) + phi.batch_shape)
    for nu in range(4):
        w = mul(mul(hat(dphi[nu]), pt), pb) - mul(mul(ph, pt), bar(dphi[nu]))
        for mu in range(4):
            T[nu, mu] = (-0.5j * mul(DUAL_BASIS[mu], w).coeffs[0]).real + s * gamma_low[nu] * j[mu]
    return T


def tetrode_trace(T: np.ndarray) -> np.ndarray:
    return np.einsum("mm...->...", T)


# hydrodynamic fields ------------------------------------------------------


@dataclass(frozen=True)
class HydroFields:
    sector: str
    rho: np.ndarray
    v: np.ndarray  # v^k, shape (3, ...)
    p: np.ndarray  # p_n = T_n^0, lower, shape (3, ...)
    u: np.ndarray  # u_n = p_n / rho
    mask: np.ndarray

    @property
    def bold_p(self) -> np.ndarray:
        return -self.p

    @property
    def masked_fraction(self) -> float:
        return float(np.mean(self.mask))


def hydro_fields(j: np.ndarray, T: np.ndarray, sector: str, eps_rel: float = EPS_HYDRO, extra_mask=None) -> HydroFields:
    rho = j[0]
    mask = density_mask(rho, eps_rel)
    if extra_mask is not None:
        mask = mask | extra_mask
    r = np.where(mask, 1.0, rho)
    v = np.where(mask, 0.0, j[1:] / r)
    p = T[1:, 0]
    u = np.where(mask, 0.0, p / r)
    return HydroFields(sector, rho, v, p, u, mask)


@dataclass(frozen=True)
class Snapshot:
    """Everything the diagnostics need at one time level."""

    field: SpinorField
    D: np.ndarray
    gamma_low: np.ndarray
    nodes: np.ndarray
    j: dict
    T: dict
    hydro: dict


def analyse(
    field: SpinorField,
    potential: PotentialSpec,
    params: PhysicsParams,
    derivative: str = "spectral",
    dphi_dt: np.ndarray | None = None,
    eps_rel: float = EPS_HYDRO,
    eps_node: float = EPS_NODE,
) -> Snapshot:
    A = potential.on_grid(field.grid.n)
    phi = field.data
    V, nodes = safe_velocity(phi, eps_node)
    if dphi_dt is None and np.any(nodes):
        dphi_dt = np.zeros_like(phi.coeffs)  # placeholder; T_0 masked at nodes
    dphi = field_derivatives(field, A, params, derivative, dphi_dt)
    gl = gamma_lower(A, V, params)
    cs = currents(phi)
    j, T, hyd = {}, {}, {}
    for s in SECTORS:
        j[s] = cs.sector(s)
        T[s] = tetrode(phi, dphi, gl, s)
        hyd[s] = hydro_fields(j[s], T[s], s, eps_rel, nodes)
    return Snapshot(field, cs.D, gl, nodes, j, T, hyd)


# single-snapshot checks ---------------------------------------------------


def momentum_projection_defect(snap: Snapshot, sector: str) -> np.ndarray:
    """``p_n - v^k T_n^k`` for ``n = 0..3`` (from ``-p_n = v_k T_n^k``), shape ``(4, ...)``."""
    h = snap.hydro[sector]
    T = snap.T[sector]
    return T[:, 0] - np.einsum("k...,nk...->n...", h.v, T[:, 1:])


def t_expression_residual(snap: Snapshot, sector: str, derivative: str = "spectral") -> np.ndarray:
    """``T_n^l - p_n v^l + (1/2) rho eps^{lk}_o v_k d_n v^o``, shape ``(3 n, 3 l, ...)``."""
    h = snap.hydro[sector]
    g = snap.field.grid
    dv = np.stack([partial(h.v, n, g, derivative) for n in range(3)])  # dv[n, o] = d_n v^o
    v_low = -h.v
    eps = EPS_UP_UP_LOW  # eps^{lk}_o
    swirl = np.einsum("lko,k...,no...->nl...", eps, v_low, dv)
    model = np.einsum("n...,l...->nl...", h.p, h.v) - 0.5 * h.rho * swirl
    return snap.T[sector][1:, 1:] - model


def epsilon_identity_defect(snap: Snapshot, sector: str, derivative: str = "spectral") -> np.ndarray:
    """``2 eps^{kl}_n T_l^n`` minus ``-2 (p x v)^k - rho((v.grad) v^k - v^k div v)``."""
    h = snap.hydro[sector]
    g = snap.field.grid
    lhs = 2 * np.einsum("kln,ln...->k...", EPS_UP_UP_LOW, snap.T[sector][1:, 1:])
    dv = np.stack([partial(h.v, n, g, derivative) for n in range(3)])
    adv = np.einsum("l...,lk...->k...", h.v, dv)
    div = np.einsum("ll...->...", dv)
    rhs_ = -2 * cross(h.bold_p, h.v) - h.rho * (adv - h.v * div)
    return lhs - rhs_


def quantization_from_hydro(
    v: np.ndarray, u: np.ndarray, gamma_low_spatial: np.ndarray, grid: Grid, derivative: str = "spectral"
) -> np.ndarray:
    """``eps^{imn}(d_m (u_n - Gamma_n) + (1/4) v . (d_m v x d_n v))`` per ``i``."""
    w = u - gamma_low_spatial
    dw = np.stack([partial(w, m, grid, derivative) for m in range(3)])  # dw[m, n]
    dv = np.stack([partial(v, m, grid, derivative) for m in range(3)])  # dv[m, :]
    trip = np.stack([[np.sum(v * cross(dv[m], dv[n]), axis=0) for n in range(3)] for m in range(3)])
    return np.einsum("imn,mn...->i...", EPS_UP, dw + 0.25 * trip)


def quantization_residual(snap: Snapshot, sector: str, derivative: str = "spectral") -> np.ndarray:
    h = snap.hydro[sector]
    s = SECTOR_SIGN[sector]
    return quantization_from_hydro(h.v, h.u, s * snap.gamma_low[1:], snap.field.grid, derivative)


def non_dirac_state(grid: Grid, amplitude: float = 1.0) -> dict[str, np.ndarray]:
    """A hydro state that no spinor produces: constant ``v``, ``u`` with nonzero curl.

    ``u = a (sin(2 pi y / L_y), 0, 0)`` has ``curl u = -a (2 pi / L_y) cos(.) e_z``.
    """
    x = grid.coords
    ky = 2 * np.pi / grid.extent[1]
    v = np.zeros((3, *grid.n))
    v[2] = 1.0
    u = np.zeros((3, *grid.n))
    u[0] = amplitude * np.sin(ky * x[1])
    return {"rho": np.ones(grid.n), "v": v, "u": u, "gamma_low": np.zeros((3, *grid.n))}


# window (time-derivative) laws -------------------------------------------


def fd_weights(offsets, at: float) -> np.ndarray:
    """First-derivative weights on nodes ``offsets`` (unit spacing) evaluated at ``at``.

    Solves the moment conditions ``sum_j w_j (x_j - at)^k / k! = [k == 1]``.
    """
    x = np.asarray(offsets, float) - at
    n = len(x)
    V = np.array([x**k / math.factorial(k) for k in range(n)])
    rhs_ = np.zeros(n)
    rhs_[1] = 1.0
    return np.linalg.solve(V, rhs_)


@dataclass(frozen=True)
class Window:
    """An odd number of equally spaced snapshots; residuals live at the middle one."""

    snaps: tuple
    dt: float

    @property
    def mid(self) -> Snapshot:
        return self.snaps[len(self.snaps) // 2]

    @property
    def order(self) -> int:
        return len(self.snaps) - 1

    def ddt(self, get) -> np.ndarray:
        k = len(self.snaps)
        w = fd_weights(range(k), k // 2)
        return sum(wi * get(sn) for wi, sn in zip(w, self.snaps) if wi != 0) / self.dt


def make_window(
    fields: list[SpinorField],
    potential: PotentialSpec,
    params: PhysicsParams,
    derivative: str = "spectral",
    eps_rel: float = EPS_HYDRO,
    width: int = 3,
    dphi_dt: str = "difference",
    rtol_dt: float = 1e-9,
) -> Window:
    """Analyse the last ``width`` (odd, >= 3) equally spaced snapshots of ``fields``.

    Time derivatives use finite differences of order ``width - 1`` on the
    window, central at the middle snapshot.  ``d_0 phi`` inside the Tetrode
    tensor is differenced as well (off-centre away from the middle) unless
    ``dphi_dt="equation"``, which takes it from the exact equation of motion.
    """
    if dphi_dt not in ("difference", "equation"):
        raise ValueError("dphi_dt must be 'difference' or 'equation'")
    if width < 3 or width % 2 == 0:
        raise ValueError("window width must be odd and >= 3")
    if len(fields) < width:
        raise InsufficientSnapshots(f"need {width} snapshots, got {len(fields)}")
    fs = list(fields)[-width:]
    ts = np.array([f.t for f in fs])
    steps = np.diff(ts)
    dt = float(steps[0])
    if not (dt > 0 and np.all(np.abs(steps - dt) <= rtol_dt * dt)):
        raise InsufficientSnapshots(f"snapshots must be equally spaced in time (got {steps})")
    cs = [f.data.coeffs for f in fs]
    snaps = []
    for i, f in enumerate(fs):
        d = None
        if dphi_dt == "difference":
            w = fd_weights(range(width), i)
            d = sum(wi * c for wi, c in zip(w, cs)) / dt
        snaps.append(analyse(f, potential, params, derivative, d, eps_rel))
    return Window(tuple(snaps), dt)


def _div(F: np.ndarray, dF0: np.ndarray, grid: Grid, derivative: str) -> np.ndarray:
    """``d_mu F^mu`` with ``F`` shape ``(4, ...)`` and given ``d_0 F^0``."""
    return dF0 + sum(partial(F[k], k - 1, grid, derivative) for k in range(1, 4))


def _G(win: Window, derivative: str) -> np.ndarray:
    """``G_{mu nu} = d_mu Gamma_nu - d_nu Gamma_mu`` at the middle snapshot."""
    g = win.mid.field.grid
    gl = win.mid.gamma_low
    dG = np.empty((4, 4) + gl.shape[1:])
    dG[0] = win.ddt(lambda s: s.gamma_low)
    for k in range(3):
        dG[k + 1] = partial(gl, k, g, derivative)
    return dG - np.swapaxes(dG, 0, 1)


def firp_residuals(win: Window, derivative: str = "spectral") -> dict[str, np.ndarray]:
    g = win.mid.field.grid
    D = win.mid.D
    dD0 = win.ddt(lambda s: s.D[:, 0])
    div = [_div(D[k], dD0[k], g, derivative) for k in range(4)]
    gl = win.mid.gamma_low
    gD = [np.sum(gl * D[k], axis=0) for k in range(4)]
    return {
        "D0": div[0],
        "D3": div[3],
        "D1": div[1] - 2 * gD[2],
        "D2": div[2] + 2 * gD[1],
    }


def mome_residual(win: Window, sector: str, derivative: str = "spectral") -> np.ndarray:
    """``d_mu T_nu^mu - s G_{mu nu} j^mu`` for ``nu = 0..3``."""
    g = win.mid.field.grid
    T = win.mid.T[sector]
    dT0 = win.ddt(lambda s: s.T[sector][:, 0])
    div = np.stack([_div(T[nu], dT0[nu], g, derivative) for nu in range(4)])
    G = _G(win, derivative)
    j = win.mid.j[sector]
    return div - SECTOR_SIGN[sector] * np.einsum("mn...,m...->n...", G, j)


def current_residual(win: Window, sector: str, derivative: str = "spectral") -> np.ndarray:
    """``d_0 j^k + d_k j^0 + 2 eps^{kl}_n T_l^n``."""
    g = win.mid.field.grid
    j = win.mid.j[sector]
    dj = win.ddt(lambda s: s.j[sector][1:])
    grad0 = np.stack([partial(j[0], k, g, derivative) for k in range(3)])
    return dj + grad0 + 2 * np.einsum("kln,ln...->k...", EPS_UP_UP_LOW, win.mid.T[sector][1:, 1:])


def hyd_residuals(win: Window, sector: str, derivative: str = "spectral") -> dict[str, np.ndarray]:
    """Residuals of the continuity, velocity and momentum equations.

    The momentum balance is evaluated for the upper components ``p^n = -p_n``,
    the same ``bold_p`` that enters the velocity equation.  Read with lower
    components its right side would change sign.
    """
    g = win.mid.field.grid
    h = win.mid.hydro[sector]
    s = SECTOR_SIGN[sector]
    rho, v = h.rho, h.v

    def dx(f, k):
        return partial(f, k, g, derivative)

    def div(F):
        return sum(dx(F[k], k) for k in range(3))

    drho = win.ddt(lambda w: w.hydro[sector].rho)
    cont = drho + div(rho * v)

    drv = win.ddt(lambda w: w.hydro[sector].rho * w.hydro[sector].v)
    flux = np.stack([div(rho * v[k] * v) for k in range(3)])
    grad_rho = np.stack([dx(rho, k) for k in range(3)])
    curl_v = np.stack([dx(v[2], 1) - dx(v[1], 2), dx(v[0], 2) - dx(v[2], 0), dx(v[1], 0) - dx(v[0], 1)])
    force = cross(v, cross(v, grad_rho)) + 2 * cross(h.bold_p + rho * curl_v, v)
    vel = drv + flux - force

    G = _G(win, derivative)
    v4 = np.concatenate([np.ones((1,) + rho.shape), v])
    Gv = np.einsum("nk...,k...->n...", G[1:], v4)  # G_{n kappa} v^kappa
    dv = np.stack([dx(v, n) for n in range(3)])  # dv[n] = d_n v
    swirl = np.stack([div(rho * cross(v, dv[n])) for n in range(3)])
    dP = win.ddt(lambda w: w.hydro[sector].bold_p)
    P_up = h.bold_p
    mom = dP + np.stack([div(P_up[n] * v) for n in range(3)]) - 0.5 * swirl - s * rho * Gv
    return {"continuity": cont, "velocity": vel, "momentum": mom}


def window_residuals(win: Window, derivative: str = "spectral") -> dict[tuple[str, str], np.ndarray]:
    """All residual fields keyed by ``(law, sector)``; sector ``"-"`` for sector-free laws."""
    out = {}
    for k, r in firp_residuals(win, derivative).items():
        out[(f"firp_{k}", "-")] = r
    for s in SECTORS:
        out[("mome", s)] = mome_residual(win, s, derivative)
        out[("current", s)] = current_residual(win, s, derivative)
        hy = hyd_residuals(win, s, derivative)
        out[("hyd_continuity", s)] = hy["continuity"]
        out[("hyd_velocity", s)] = hy["velocity"]
        out[("hyd_momentum", s)] = hy["momentum"]
        out[("result", s)] = t_expression_residual(win.mid, s, derivative)
        out[("quco", s)] = quantization_residual(win.mid, s, derivative)
    return out


def residual_mask(win: Window | Snapshot, sector: str) -> np.ndarray:
    snap = win.mid if isinstance(win, Window) else win
    if sector == "-":
        return snap.nodes
    return snap.hydro[sector].mask


def residual_norms(r: np.ndarray, mask: np.ndarray, grid: Grid) -> dict[str, float]:
    """Discrete L2 (volume weighted, over components) and max norms on unmasked points."""
    keep = ~mask
    comp = r.reshape((-1,) + grid.n) if r.ndim > 3 else r[None]
    sq = np.sum(np.abs(comp) ** 2, axis=0)
    if not np.any(keep):
        return {"l2": float("nan"), "linf": float("nan")}
    return {
        "l2": float(np.sqrt(np.sum(sq[keep]) * grid.cell_volume)),
        "linf": float(np.sqrt(np.max(sq[keep]))),
    }


def structural_defects(snap: Snapshot) -> dict[tuple[str, str], tuple[float, float]]:
    """Pointwise laws at one time level as ``(max relative defect, masked fraction)``.

    Lightlike currents are scaled by ``(j^0)^2``, orthogonality by ``(J^0)^2``,
    the Tetrode trace and the momentum projection by ``max(1, max |T|)``.
    """
    out = {}
    phi = snap.field.data
    nodes = snap.nodes
    orth = orthogonality_defect(phi)
    out[("orthogonality", "-")] = (_masked_max(orth, nodes), float(np.mean(nodes)))
    light = chiral_lightlike_check(phi)
    for s in SECTORS:
        mask = snap.hydro[s].mask
        T = snap.T[s]
        scale = max(1.0, float(np.max(np.abs(T))))
        out[("lightlike", s)] = (_masked_max(light[s], mask), float(np.mean(mask)))
        out[("tetrode_trace", s)] = (_masked_max(np.abs(tetrode_trace(T)) / scale, nodes), float(np.mean(nodes)))
        proj = np.max(np.abs(momentum_projection_defect(snap, s)), axis=0) / scale
        out[("momentum_projection", s)] = (_masked_max(proj, mask), float(np.mean(mask)))
    return out


def _masked_max(a: np.ndarray, mask: np.ndarray) -> float:
    keep = ~mask
    if not np.any(keep):
        return float("nan")
    return float(np.max(np.asarray(a)[keep]))


def residual_table(win: Window, derivative: str = "spectral") -> list[dict]:
    """Rows ``{law, sector, norm_type, value, masked_fraction}``."""
    rows = []
    g = win.mid.field.grid
    for (law, s), r in window_residuals(win, derivative).items():
        mask = residual_mask(win, s)
        for nt, val in residual_norms(r, mask, g).items():
            rows.append({"law": law, "sector": s, "norm_type": nt, "value": val, "masked_fraction": float(np.mean(mask))})
    return rows


__all__ = [
    "SECTORS",
    "CurrentSet",
    "HydroFields",
    "Snapshot",
    "Window",
    "currents",
    "sector_current",
    "orthogonality_defect",
    "chiral_lightlike_check",
    "tetrode",
    "tetrode_null_form",
    "tetrode_trace",
    "field_derivatives",
    "gamma_lower",
    "safe_velocity",
    "hydro_fields",
    "analyse",
    "momentum_projection_defect",
    "t_expression_residual",
    "epsilon_identity_defect",
    "quantization_from_hydro",
    "quantization_residual",
    "non_dirac_state",
    "make_window",
    "fd_weights",
    "firp_residuals",
    "mome_residual",
    "current_residual",
    "hyd_residuals",
    "window_residuals",
    "residual_norms",
    "residual_table",
    "structural_defects",
    "cross",
    "lower",
]
