"""Command-line driver.

Exit codes: 0 success, 2 validation error, 3 numerical failure (blow-up,
growth violation, nodal point), 4 diagnostic threshold breach (``--strict``;
``algebra-test`` always reports failures this way).
"""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
import sys
import time
import warnings
from pathlib import Path

import click
import numpy as np

from . import config as cfgmod
from . import snapshots as snapio
from .algebra import Paravector, dagger, det, hat, mul
from .convergence import convergence_study
from .errors import (
    BlowUp,
    ConfigError,
    DegenerateJ,
    GrowthViolation,
    InconsistentPair,
    InsufficientSnapshots,
    LeftDomain,
    NodalPoint,
)
from .evolution import evolve
from .flowlines import flowline_integrate, snapshot_velocity
from .grid import SpinorField
from .hydro import make_window, residual_table, structural_defects
from .identities import run_suite
from .initial import PlaneWaveInit
from .snapshots import SnapshotFormatError
from .spinor import nonlinear_residual

log = logging.getLogger("cl3dirac")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_THRESHOLD = 0, 2, 3, 4
PLANEWAVE_TOL = 1e-12

_VALIDATION = (ConfigError, InconsistentPair, DegenerateJ, InsufficientSnapshots, SnapshotFormatError, FileNotFoundError)
_NUMERICAL = (BlowUp, GrowthViolation, NodalPoint)


def _write_csv(path: Path, rows: list[dict], columns: list[str]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return path


def _load_config(path: str | None, fallback_dir: Path | None = None) -> cfgmod.RunConfig:
    if path is not None:
        return cfgmod.load(path)
    if fallback_dir is not None and (fallback_dir / "config.toml").exists():
        return cfgmod.load(fallback_dir / "config.toml")
    return cfgmod.RunConfig()


def _formats(cfg: cfgmod.RunConfig, fmt: str | None) -> tuple[str, ...]:
    return (fmt,) if fmt else tuple(cfg.output.formats)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(type(o))


@click.group()
@click.option("-v", "--verbose", count=True, help="Log level: -v info, -vv debug.")
def cli(verbose: int):
    """Cl(3) nonlinear Dirac evolution and hydrodynamic diagnostics."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s %(message)s", stream=sys.stderr, force=True)


# algebra-test -----------------------------------------------------------------


@cli.command("algebra-test")
@click.option("--cases", default=10_000, show_default=True, type=click.IntRange(min=0))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out", type=click.Path(file_okay=False), help="Write report.json here.")
@click.option("--strict", is_flag=True, help="Accepted for symmetry; failures always exit 4.")
def algebra_test(cases: int, seed: int, out: str | None, strict: bool):
    """Run the algebra invariants over random elements and report per-law maxima."""
    results = run_suite(cases, seed)
    for r in results:
        click.echo(f"{r.group:8s} {r.name:24s} max_error={r.max_error:.3e} tol={r.tol:.0e} {'ok' if r.passed else 'FAIL'}")
    failed = [r.name for r in results if not r.passed]
    click.echo(f"cases={cases} seed={seed} laws={len(results)} failed={len(failed)}")
    if out:
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        report = {
            "cases": cases,
            "seed": seed,
            "failed": failed,
            "laws": [dict(dataclasses.asdict(r), passed=r.passed) for r in results],
        }
        (d / "report.json").write_text(json.dumps(report, indent=2, default=_json_default))
    return EXIT_THRESHOLD if failed else EXIT_OK


# planewave --------------------------------------------------------------------


def planewave_report(pw: PlaneWaveInit, cfg: cfgmod.RunConfig) -> tuple[dict, object]:
    pot = cfg.potential_spec()
    if not pot.is_constant:
        raise ConfigError("plane waves need a zero or constant potential")
    A0 = pot.constant_value()
    params = cfg.physics
    spec = pw.spec(params.q * A0)
    N, J, V = spec.N, spec.J.coeffs.real, spec.V.coeffs.real
    M = spec.M.coeffs
    round_trip = float(np.max(np.abs(mul(spec.M, dagger(spec.M)).coeffs - spec.J.coeffs)))
    rng = np.random.default_rng(cfg.seed)
    x = rng.uniform(0.0, 1.0, size=(4, 64)) * np.array([1.0, *cfg.grid.extent]).reshape(4, 1)
    phi = spec.eval(x, params.m)
    dphi = [hat(d) for d in spec.derivatives(x, params.m)]
    A = Paravector(np.broadcast_to(A0.reshape(4, 1), (4, x.shape[1])).astype(np.complex128))
    res = nonlinear_residual(phi, dphi, A, params, mode="exact")
    residual = float(np.max(np.abs(res.coeffs)))
    k = spec.covector(params.m)
    L = np.array(cfg.grid.extent)
    winding = -k[1:] * L / (2 * np.pi)
    periodic = bool(np.all(np.abs(winding - np.round(winding)) <= 1e-9))
    report = {
        "N": N,
        "J": J.tolist(),
        "M_re": M.real.tolist(),
        "M_im": M.imag.tolist(),
        "MMdagger_minus_J": round_trip,
        "abs_det_M_minus_N": abs(abs(complex(det(spec.M))) - N),
        "V": V.tolist(),
        "det_V_minus_1": abs(float(det(spec.V).real) - 1.0),
        "V0_identity": abs(V[0] - float(np.sqrt(1.0 + V[1:] @ V[1:]))),
        "equation_residual": residual,
        "covector": k.tolist(),
        "periodic_in_box": periodic,
    }
    return report, spec


@cli.command("planewave")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="Run config (grid, physics, potential, initial.planewave).")
@click.option("--N", "N", type=float, help="Mass density N = |det M|.")
@click.option("--J", "J", type=float, nargs=4, help="Dirac current J^mu (upper components).")
@click.option("--velocity", type=float, nargs=3, help="Spatial pilot velocity V^k (alternative to --J).")
@click.option("--phi0", type=float, help="Phase offset.")
@click.option("--beta", type=float, help="Global phase, det M = N e^{i beta}.")
@click.option("--out", "out", type=click.Path(file_okay=False), help="Write report and analytic snapshots here.")
@click.option("--snapshots", "n_snap", default=7, show_default=True, type=click.IntRange(min=1))
@click.option("--dt", "dt", default=5e-3, show_default=True, type=float, help="Snapshot spacing.")
@click.option("--format", "fmt", type=click.Choice(["bin", "csv"]))
@click.option("--seed", type=int)
@click.option("--strict", is_flag=True, help="Exit 4 if any check exceeds 1e-12.")
def planewave(config_path, N, J, velocity, phi0, beta, out, n_snap, dt, fmt, seed, strict):
    """Reconstruct a plane wave from (N, J), check it, and optionally write snapshots."""
    cfg = _load_config(config_path)
    if seed is not None:
        cfg = dataclasses.replace(cfg, seed=seed)
    base = cfg.initial.planewave
    kw = {"N": base.N, "J": base.J, "velocity": base.velocity, "phi0": base.phi0, "beta": base.beta}
    if J and velocity:
        raise ConfigError("give either --J or --velocity")
    if J:
        kw.update(J=tuple(J), velocity=None)
    if velocity:
        kw.update(velocity=tuple(velocity), J=None)
    for name, val in (("N", N), ("phi0", phi0), ("beta", beta)):
        if val is not None:
            kw[name] = val
    try:
        pw = PlaneWaveInit(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    report, spec = planewave_report(pw, cfg)
    for key, val in report.items():
        click.echo(f"{key} = {val}")
    checks = ["MMdagger_minus_J", "abs_det_M_minus_N", "det_V_minus_1", "V0_identity", "equation_residual"]
    scale = max(1.0, abs(report["J"][0]))
    breach = [c for c in checks if report[c] > PLANEWAVE_TOL * (scale if c == "MMdagger_minus_J" else 1.0)]
    if out:
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        (d / "report.json").write_text(json.dumps(report, indent=2, default=_json_default))
        if not report["periodic_in_box"]:
            log.warning("plane wave is not periodic in the box; spatial derivatives of the snapshots are inaccurate")
        snap_cfg = dataclasses.replace(
            cfg,
            initial=dataclasses.replace(cfg.initial, kind="planewave", planewave=pw),
            hydro=dataclasses.replace(cfg.hydro, window=n_snap if n_snap % 2 else n_snap - 1, dphi_dt="equation"),
        )
        cfgmod.save(snap_cfg, d / "config.toml")
        for i in range(n_snap):
            t = i * dt
            fld = SpinorField(cfg.grid, spec.eval(cfg.grid.spacetime(t), cfg.physics.m), t)
            for f in _formats(cfg, fmt):
                snapio.write_snapshot(fld, d, i, f)
    if breach:
        click.echo(f"threshold breach: {', '.join(breach)}", err=True)
        if strict:
            return EXIT_THRESHOLD
    return EXIT_OK


# evolve -----------------------------------------------------------------------


@cli.command("evolve")
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
@click.option("--out", "out", type=click.Path(file_okay=False), help="Output directory (default: output.dir).")
@click.option("--stride", type=click.IntRange(min=1), help="Snapshot stride (default: output.stride).")
@click.option("--format", "fmt", type=click.Choice(["bin", "csv"]))
@click.option("--seed", type=int)
@click.option("--strict", is_flag=True, help="Exit 4 when dt exceeds the CFL bound.")
def evolve_cmd(config_path, out, stride, fmt, seed, strict):
    """Evolve the configured initial data and write snapshots plus a summary."""
    cfg = _load_config(config_path)
    if seed is not None:
        cfg = dataclasses.replace(cfg, seed=seed)
    stride = stride or cfg.output.stride
    outdir = Path(out) if out else cfg.resolve_path(cfg.output.dir)
    outdir.mkdir(parents=True, exist_ok=True)
    cfgmod.save(dataclasses.replace(cfg, output=dataclasses.replace(cfg.output, dir=str(outdir), stride=stride)), outdir / "config.toml")
    formats = _formats(cfg, fmt)
    field0 = cfgmod.build_initial(cfg)
    potential = cfg.potential_spec()
    events = (outdir / "events.jsonl").open("w")
    written = []

    def observe(fld, rec):
        events.write(json.dumps(rec, default=_json_default) + "\n")
        log.info("step=%d t=%.6g l2=%.15g h1=%.6g envelope_ratio=%.12g", rec["step"], rec["t"], rec["l2"], rec["h1"], rec["envelope_ratio"])
        idx = len(written)
        for f in formats:
            snapio.write_snapshot(fld, outdir, idx, f)
        written.append(fld.t)

    start = time.perf_counter()
    status, err, code = "ok", None, EXIT_OK
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        try:
            traj = evolve(field0, potential, cfg.physics, cfg.scheme, stride=stride, observers=(observe,), keep=False)
            scheme = traj.scheme
        except _NUMERICAL as exc:
            status, err, code = type(exc).__name__, str(exc), EXIT_NUMERICAL
            scheme = cfg.scheme
        finally:
            events.close()
    cfl = [str(w.message) for w in caught if "c_cfl" in str(w.message)]
    wall = time.perf_counter() - start
    recs = [json.loads(line) for line in (outdir / "events.jsonl").read_text().splitlines()]
    l2 = [r["l2"] for r in recs]
    summary = {
        "status": status,
        "error": err,
        "wall_time": wall,
        "dt": scheme.dt,
        "t_end": cfg.scheme.t_end,
        "mode": cfg.scheme.mode,
        "method": cfg.scheme.method,
        "stride": stride,
        "snapshots": len(written),
        "l2_relative_drift": (max(abs(x - l2[0]) for x in l2) / l2[0]) if l2 and l2[0] > 0 else 0.0,
        "max_envelope_ratio": max((r["envelope_ratio"] for r in recs), default=0.0),
        "within_envelope": status != "GrowthViolation",
        "cfl_warnings": cfl,
        "records": recs,
    }
    (outdir / "summary.json").write_text(json.dumps(summary, indent=2, default=_json_default))
    click.echo(
        f"status={status} snapshots={len(written)} l2_relative_drift={summary['l2_relative_drift']:.3e} "
        f"max_envelope_ratio={summary['max_envelope_ratio']:.12g} wall={wall:.2f}s"
    )
    if err:
        click.echo(f"{status}: {err}", err=True)
    if code == EXIT_OK and strict and cfl:
        return EXIT_THRESHOLD
    return code


# hydro -------------------------------------------------------------------------


HYDRO_COLUMNS = ["law", "sector", "norm_type", "value", "masked_fraction"]
FLOWLINE_COLUMNS = ["line_id", "s", "x", "y", "z"]


def default_seeds(extent) -> np.ndarray:
    L = np.array(extent)
    return np.array([[0.5, 0.5, 0.5], [0.25, 0.5, 0.5], [0.5, 0.25, 0.75], [0.75, 0.75, 0.25]]) * L


@cli.command("hydro")
@click.option("--snapshots", "snap_dir", required=True, type=click.Path(file_okay=False))
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="Default: config.toml beside the snapshots.")
@click.option("--out", "out", type=click.Path(file_okay=False), help="Default: <snapshots>/hydro.")
@click.option("--stride", type=click.IntRange(min=1), default=1, show_default=True, help="Use every N-th snapshot.")
@click.option("--seed", type=int)
@click.option("--strict", is_flag=True, help="Exit 4 if any residual exceeds hydro.threshold.")
def hydro_cmd(snap_dir, config_path, out, stride, seed, strict):
    """Evaluate the hydrodynamic laws on a snapshot window and trace flowlines."""
    d = Path(snap_dir)
    if not d.is_dir():
        raise FileNotFoundError(f"snapshot directory {d} does not exist")
    cfg = _load_config(config_path, d)
    fields = snapio.load_directory(d)[::stride]
    if not fields:
        raise InsufficientSnapshots(f"no snapshots in {d}")
    hc = cfg.hydro
    potential = cfg.potential_spec()
    derivative = cfg.scheme.derivative
    win = make_window(fields, potential, cfg.physics, derivative, hc.eps_rel, hc.window, hc.dphi_dt)
    outdir = Path(out) if out else d / "hydro"
    outdir.mkdir(parents=True, exist_ok=True)
    rows = residual_table(win, derivative)
    for s in win.snaps:
        for (law, sector), (val, mf) in structural_defects(s).items():
            rows.append({"law": law, "sector": sector, "norm_type": "linf_rel", "value": val, "masked_fraction": mf, "t": s.field.t})
    # collapse structural rows to the worst snapshot
    merged: dict[tuple, dict] = {}
    for r in rows:
        key = (r["law"], r["sector"], r["norm_type"])
        if key not in merged or r["value"] > merged[key]["value"]:
            merged[key] = r
    rows = list(merged.values())
    by_law: dict[str, list] = {}
    for r in rows:
        by_law.setdefault(r["law"], []).append(r)
    for law, rs in by_law.items():
        _write_csv(outdir / f"{law}.csv", rs, HYDRO_COLUMNS)
    _write_csv(outdir / "residuals.csv", rows, HYDRO_COLUMNS)
    worst = max(rows, key=lambda r: -1 if np.isnan(r["value"]) else r["value"])
    for r in rows:
        click.echo(f"{r['law']:20s} {r['sector']:2s} {r['norm_type']:8s} {r['value']:.3e} masked={r['masked_fraction']:.3f}")

    seeds = np.array(hc.seeds, dtype=float) if hc.seeds else default_seeds(fields[0].grid.extent)
    lines = []
    left = 0
    vel = snapshot_velocity(fields, hc.flowline_kind, hc.eps_rel)
    for i, sd in enumerate(seeds):
        try:
            rs = flowline_integrate(fields, sd[None], hc.flowline_kind, hc.flowline_steps, velocity=vel)
        except LeftDomain as exc:
            left += 1
            log.warning("flowline %d: %s", i, exc)
            continue
        lines.extend(dict(r, line_id=i) for r in rs)
    _write_csv(outdir / "flowlines.csv", lines, FLOWLINE_COLUMNS)
    click.echo(f"window={len(win.snaps)} t_mid={win.mid.field.t:.6g} worst={worst['law']}/{worst['sector']} {worst['value']:.3e} flowlines={len(seeds) - left}/{len(seeds)}")
    breach = [r for r in rows if not (r["value"] <= hc.threshold)]
    if strict and breach:
        click.echo(f"{len(breach)} residual(s) above threshold {hc.threshold:.1e}", err=True)
        return EXIT_THRESHOLD
    return EXIT_OK


# convergence --------------------------------------------------------------------


@cli.command("convergence")
@click.option("--config", "config_path", type=click.Path(dir_okay=False))
@click.option("--out", "out", type=click.Path(file_okay=False), default="convergence", show_default=True)
@click.option("--seed", type=int)
@click.option("--strict", is_flag=True, help="Exit 4 if any law misses its nominal order.")
def convergence_cmd(config_path, out, seed, strict):
    """Refinement study of all law residuals for the configured bump."""
    cfg = _load_config(config_path)
    study = cfg.convergence_config()
    potential = cfg.potential_spec()
    start = time.perf_counter()
    table, orders = convergence_study(study, cfg.physics, potential, cfg.grid.extent)
    outdir = Path(out)
    _write_csv(outdir / "convergence_table.csv", table, ["n", *HYDRO_COLUMNS])
    pair_cols = [f"order_{a}_{b}" for a, b in zip(study.resolutions[:-1], study.resolutions[1:])]
    _write_csv(outdir / "convergence_orders.csv", orders, ["law", "sector", "nominal", "measured", *pair_cols, "decreasing", "pass"])
    for r in orders:
        pairs = " ".join(f"{r[c]:.2f}" for c in pair_cols)
        click.echo(f"{r['law']:16s} {r['sector']:2s} nominal={r['nominal']:.1f} pairs=[{pairs}] {'ok' if r['pass'] else 'FAIL'}")
    click.echo(f"wall={time.perf_counter() - start:.1f}s")
    if strict and not all(r["pass"] for r in orders):
        return EXIT_THRESHOLD
    return EXIT_OK


# entry point -----------------------------------------------------------------------


def main(argv: list[str] | None = None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="cl3dirac", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return EXIT_VALIDATION
    except click.Abort:
        return 1
    except _NUMERICAL as exc:
        click.echo(f"{type(exc).__name__}: {exc}", err=True)
        return EXIT_NUMERICAL
    except _VALIDATION as exc:
        click.echo(f"{type(exc).__name__}: {exc}", err=True)
        return EXIT_VALIDATION
    except ValueError as exc:
        click.echo(f"invalid input: {exc}", err=True)
        return EXIT_VALIDATION
    return int(rv or 0)


def run() -> None:
    sys.exit(main())


__all__ = ["cli", "main", "run"]
