"""Flowlines of the chiral velocities ``v`` and of the Dirac current ``V``.

Both congruences solve ``dgamma/dt = w(t, gamma)`` with ``w = j^k / j^0`` of the
respective current: unit speed for the chiral currents, ``|V|/V^0 < 1`` for the
Dirac current.  Velocities are sampled periodically; reported positions are
not wrapped back into the box, so polylines stay continuous.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import ndimage

from .errors import LeftDomain
from .grid import Grid, SpinorField
from .hydro import EPS_HYDRO, density_mask, sector_current
from .spinor import EPS_NODE, dirac_current, node_mask

VelocityFn = Callable[[float, np.ndarray], np.ndarray]


def rk4_paths(
    velocity: VelocityFn,
    seeds: np.ndarray,
    t0: float,
    t1: float,
    n_steps: int,
    wrap: np.ndarray | None = None,
) -> np.ndarray:
    """Classical RK4 for all seeds at once; returns positions ``(n_steps + 1, n_seeds, 3)``."""
    x = np.array(seeds, dtype=float).reshape(-1, 3)
    h = (t1 - t0) / n_steps
    out = np.empty((n_steps + 1,) + x.shape)
    out[0] = x
    t = t0
    for i in range(n_steps):
        k1 = velocity(t, x)
        k2 = velocity(t + h / 2, x + h / 2 * k1)
        k3 = velocity(t + h / 2, x + h / 2 * k2)
        k4 = velocity(t + h, x + h * k3)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + (i + 1) * h
        out[i + 1] = x
    if wrap is not None:
        out = np.mod(out, wrap)
    return out


class PeriodicField:
    """Periodic cubic B-spline interpolation of a vector field sampled on a grid."""

    def __init__(self, grid: Grid, values: np.ndarray):
        self.grid = grid
        vals = np.asarray(values, dtype=float)
        self._coef = [ndimage.spline_filter(c, order=3, mode="grid-wrap") for c in vals]
        self._h = np.asarray(grid.spacing, dtype=float)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        idx = (x.reshape(-1, 3) / self._h).T
        out = [ndimage.map_coordinates(c, idx, order=3, mode="grid-wrap", prefilter=False) for c in self._coef]
        return np.stack(out, axis=-1).reshape(x.shape[:-1] + (len(out),))


@dataclass
class SnapshotVelocity:
    """Time-dependent velocity from snapshots, linear in time between them.

    ``masks`` holds per-snapshot scalar fields that are positive on
    admissible points; a path leaves the domain when the interpolated value
    drops to zero or below.
    """

    times: np.ndarray
    fields: list
    masks: list

    def _bracket(self, t: float) -> tuple[int, float]:
        if len(self.times) == 1:
            return 0, 0.0
        i = int(np.clip(np.searchsorted(self.times, t) - 1, 0, len(self.times) - 2))
        a = (t - self.times[i]) / (self.times[i + 1] - self.times[i])
        return i, float(np.clip(a, 0.0, 1.0))

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        i, a = self._bracket(t)
        m = self.masks[i](x)[..., 0]
        if len(self.times) > 1 and a > 0:
            m = np.minimum(m, self.masks[i + 1](x)[..., 0])
        if np.any(m <= 0):
            raise LeftDomain(f"flowline entered a masked region at t = {t:.6g}")
        w = self.fields[i](x)
        if len(self.times) > 1 and a > 0:
            w = (1 - a) * w + a * self.fields[i + 1](x)
        return w


def _velocity_and_margin(field: SpinorField, kind: str, eps_rel: float, eps_node: float):
    phi = field.data
    if kind == "pilot":
        j = dirac_current(phi).coeffs.real
        bad = node_mask(phi, eps_node)
    elif kind in ("R", "L"):
        j = sector_current(phi, kind)
        bad = density_mask(j[0], eps_rel)
    else:
        raise ValueError(f"unknown flowline kind {kind!r}")
    w = np.where(bad, 0.0, j[1:] / np.where(bad, 1.0, j[0]))
    margin = np.where(bad, -1.0, 1.0)
    return w, margin


def snapshot_velocity(
    fields: list[SpinorField], kind: str, eps_rel: float = EPS_HYDRO, eps_node: float = EPS_NODE
) -> SnapshotVelocity:
    """``kind`` is ``"R"``/``"L"`` for chiral flowlines or ``"pilot"`` for the Dirac current."""
    vel, mk = [], []
    for f in fields:
        w, margin = _velocity_and_margin(f, kind, eps_rel, eps_node)
        vel.append(PeriodicField(f.grid, w))
        mk.append(PeriodicField(f.grid, margin[None]))
    return SnapshotVelocity(np.array([f.t for f in fields]), vel, mk)


def flowline_integrate(
    fields: list[SpinorField],
    seeds: np.ndarray,
    kind: str = "R",
    n_steps: int = 100,
    t_span: tuple[float, float] | None = None,
    velocity: SnapshotVelocity | None = None,
) -> list[dict]:
    """Integrate flowlines through a snapshot sequence; returns polyline rows.

    Rows are ``{line_id, s, x, y, z}`` with ``s`` the elapsed coordinate time.
    ``velocity`` may carry a prebuilt :func:`snapshot_velocity` of ``fields``.
    """
    if not fields:
        raise ValueError("no snapshots")
    t0, t1 = t_span if t_span is not None else (fields[0].t, fields[-1].t)
    if t1 == t0:
        t1 = t0 + 1.0
    vel = velocity if velocity is not None else snapshot_velocity(fields, kind)
    paths = rk4_paths(vel, seeds, t0, t1, n_steps)
    s = np.linspace(0.0, t1 - t0, n_steps + 1)
    rows = []
    for line in range(paths.shape[1]):
        for i in range(paths.shape[0]):
            x, y, z = paths[i, line]
            rows.append({"line_id": line, "s": float(s[i]), "x": float(x), "y": float(y), "z": float(z)})
    return rows


__all__ = ["rk4_paths", "PeriodicField", "SnapshotVelocity", "snapshot_velocity", "flowline_integrate"]
