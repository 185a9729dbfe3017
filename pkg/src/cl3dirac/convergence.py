"""Refinement study for the hydrodynamic law residuals.

The same initial data is evolved on a sequence of grids with ``dt``
proportional to the spacing, and every law is evaluated on a window of the
last snapshots.  The measured order of a law is the slope on the finest pair
of resolutions; coarser pairs are reported alongside it, and the residual must
decrease at every refinement.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .evolution import SchemeConfig, evolve
from .grid import Grid
from .hydro import make_window, residual_table
from .initial import REFERENCE_BUMP, BumpInit
from .spinor import PhysicsParams, PotentialSpec

log = logging.getLogger(__name__)

SNAPSHOT_LAWS = ("result", "quco")


@dataclass(frozen=True)
class ConvergenceConfig:
    resolutions: tuple = (16, 32, 64)
    t_end: float = 0.5
    derivative: str = "central-4"
    mode: str = "nonlinear-exact"
    method: str = "strang-split"
    dt_factor: float = 0.25
    window: int = 3
    order_tol: float = 0.3
    norm_type: str = "l2"
    initial: BumpInit = field(default=REFERENCE_BUMP)

    def __post_init__(self):
        object.__setattr__(self, "resolutions", tuple(int(n) for n in self.resolutions))
        if len(self.resolutions) < 2 or list(self.resolutions) != sorted(set(self.resolutions)):
            raise ValueError("need at least two strictly increasing resolutions")
        if not self.t_end > 0 or not self.dt_factor > 0:
            raise ValueError("t_end and dt_factor must be positive")
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError("window must be odd and >= 3")
        if self.norm_type not in ("l2", "linf"):
            raise ValueError("norm_type must be 'l2' or 'linf'")
        SchemeConfig(mode=self.mode, method=self.method, derivative=self.derivative)


def nominal_order(law: str, derivative: str, window: int) -> float:
    """Expected order under simultaneous refinement with ``dt`` proportional to ``h``."""
    spatial = math.inf if derivative == "spectral" else 4.0
    if law in SNAPSHOT_LAWS:
        return spatial
    return min(spatial, float(window - 1))


def run_resolution(
    n: int,
    cfg: ConvergenceConfig,
    params: PhysicsParams,
    potential: PotentialSpec,
    extent=(2 * np.pi,) * 3,
) -> list[dict]:
    grid = Grid((n, n, n), extent)
    f0 = cfg.initial.field(grid)
    dt = cfg.dt_factor * float(np.min(grid.spacing))
    nsteps = max(cfg.window - 1, int(round(cfg.t_end / dt)))
    scheme = SchemeConfig(
        dt=dt, t_end=nsteps * dt, method=cfg.method, derivative=cfg.derivative, mode=cfg.mode
    )
    if potential.kind == "sampled":
        raise ValueError("the refinement study needs a zero or constant potential")
    start = nsteps - (cfg.window - 1)
    tail: list = []

    def collect(fld, rec):
        if rec["step"] >= start:
            tail.append(fld)

    evolve(f0, potential, params, scheme, stride=1, observers=(collect,), keep=False)
    win = make_window(tail, potential, params, cfg.derivative, width=cfg.window)
    return [dict(r, n=n) for r in residual_table(win, cfg.derivative)]


def convergence_study(
    cfg: ConvergenceConfig,
    params: PhysicsParams,
    potential: PotentialSpec,
    extent=(2 * np.pi,) * 3,
) -> tuple[list[dict], list[dict]]:
    """Returns ``(table, orders)``.

    ``table`` has one row per resolution, law, sector and norm.  ``orders``
    has one row per law and sector for ``cfg.norm_type`` with the pairwise
    slopes, the nominal order, and the pass flag.
    """
    table = []
    for n in cfg.resolutions:
        t0 = time.perf_counter()
        table.extend(run_resolution(n, cfg, params, potential, extent))
        log.info("resolution=%d wall=%.2fs", n, time.perf_counter() - t0)
    vals: dict[tuple[str, str], list[float]] = {}
    for r in table:
        if r["norm_type"] == cfg.norm_type:
            vals.setdefault((r["law"], r["sector"]), []).append(r["value"])
    ns = np.array(cfg.resolutions, dtype=float)
    orders = []
    for (law, s), v in vals.items():
        v = np.array(v)
        with np.errstate(divide="ignore", invalid="ignore"):
            slopes = np.log(v[:-1] / v[1:]) / np.log(ns[1:] / ns[:-1])
        nominal = nominal_order(law, cfg.derivative, cfg.window)
        measured = float(slopes[-1])
        decreasing = bool(np.all(v[1:] < v[:-1]))
        ok = decreasing and (measured >= nominal - cfg.order_tol if math.isfinite(nominal) else True)
        row = {"law": law, "sector": s, "nominal": nominal, "measured": measured, "decreasing": decreasing, "pass": ok}
        for (a, b), sl in zip(zip(cfg.resolutions[:-1], cfg.resolutions[1:]), slopes):
            row[f"order_{a}_{b}"] = float(sl)
        orders.append(row)
    return table, orders


__all__ = ["ConvergenceConfig", "nominal_order", "run_resolution", "convergence_study"]
