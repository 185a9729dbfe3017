"""Run configuration: a TOML file with one table per section.

Loading is fail-closed: unknown sections or keys, wrong value types, and
values that violate a sub-invariant all raise :class:`ConfigError`.  A minimal
file::

    seed = 0

    [physics]
    m = 1.0
    lam = 0.1

    [grid]
    n = [16, 16, 16]

    [scheme]
    t_end = 0.5
    mode = "linear"

    [initial]
    kind = "planewave"

    [initial.planewave]
    N = 1.0
    velocity = [0.3, 0.0, -0.2]
"""
from __future__ import annotations

import dataclasses
import math
import types
import typing
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import tomli
import tomli_w

from .convergence import ConvergenceConfig
from .errors import ConfigError
from .evolution import SchemeConfig
from .grid import Grid, SpinorField
from .initial import REFERENCE_BUMP, BumpInit, FileInit, PlaneWaveInit
from .spinor import PhysicsParams, PotentialSpec

INITIAL_KINDS = ("planewave", "bump", "file")
OUTPUT_FORMATS = ("bin", "csv")


@dataclass(frozen=True)
class PotentialConfig:
    """``kind`` is ``zero``, ``constant`` (``values``: four reals, upper
    components) or ``sampled`` (``file``: ``.npy`` array of shape ``(4, nx, ny, nz)``)."""

    kind: str = "zero"
    values: tuple = (0.0, 0.0, 0.0, 0.0)
    file: str = ""

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "sampled"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if len(self.values) != 4:
            raise ValueError("potential values need four components")
        if self.kind == "sampled" and not self.file:
            raise ValueError("sampled potential needs a file")

    def spec(self, base_dir: Path | None = None) -> PotentialSpec:
        if self.kind == "sampled":
            path = Path(self.file)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return PotentialSpec("sampled", np.load(path))
        if self.kind == "constant":
            return PotentialSpec("constant", np.array(self.values, dtype=float))
        return PotentialSpec()


@dataclass(frozen=True)
class InitialConfig:
    kind: str = "planewave"
    planewave: PlaneWaveInit = field(default_factory=lambda: PlaneWaveInit(velocity=(0.0, 0.0, 0.0)))
    bump: BumpInit = REFERENCE_BUMP
    file: FileInit = FileInit()

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise ValueError(f"initial kind must be one of {INITIAL_KINDS}")
        if self.kind == "file" and not self.file.path:
            raise ValueError("initial kind 'file' needs [initial.file] path")


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    stride: int = 1
    formats: tuple = ("bin",)

    def __post_init__(self):
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if not self.formats or any(f not in OUTPUT_FORMATS for f in self.formats):
            raise ValueError(f"formats must be a nonempty subset of {OUTPUT_FORMATS}")


@dataclass(frozen=True)
class HydroConfig:
    window: int = 3
    dphi_dt: str = "difference"
    eps_rel: float = 1e-10
    threshold: float = 1e-10
    flowline_kind: str = "R"
    flowline_steps: int = 100
    seeds: tuple = ()

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError("window must be odd and >= 3")
        if self.dphi_dt not in ("difference", "equation"):
            raise ValueError("dphi_dt must be 'difference' or 'equation'")
        if self.flowline_kind not in ("R", "L", "pilot"):
            raise ValueError("flowline_kind must be R, L or pilot")
        if self.flowline_steps < 1 or not self.eps_rel > 0 or not self.threshold > 0:
            raise ValueError("flowline_steps, eps_rel and threshold must be positive")
        if any(len(s) != 3 for s in self.seeds):
            raise ValueError("each flowline seed needs three coordinates")


@dataclass(frozen=True)
class ConvergenceSection:
    resolutions: tuple = (16, 32, 64)
    t_end: float = 0.5
    derivative: str = "central-4"
    mode: str = "nonlinear-exact"
    method: str = "strang-split"
    dt_factor: float = 0.25
    window: int = 3
    order_tol: float = 0.3
    norm_type: str = "l2"

    def __post_init__(self):
        res = tuple(int(n) for n in self.resolutions)
        if res != tuple(self.resolutions):
            raise ValueError("resolutions must be integers")
        object.__setattr__(self, "resolutions", res)
        self.study(REFERENCE_BUMP)

    def study(self, initial: BumpInit) -> ConvergenceConfig:
        kw = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        return ConvergenceConfig(initial=initial, **kw)


@dataclass(frozen=True)
class RunConfig:
    physics: PhysicsParams = PhysicsParams()
    grid: Grid = Grid()
    scheme: SchemeConfig = SchemeConfig()
    potential: PotentialConfig = PotentialConfig()
    initial: InitialConfig = InitialConfig()
    output: OutputConfig = OutputConfig()
    hydro: HydroConfig = HydroConfig()
    convergence: ConvergenceSection = ConvergenceSection()
    seed: int = 0
    base_dir: Path | None = field(default=None, compare=False)

    def __post_init__(self):
        pot = self.potential.spec(self.base_dir) if self.potential.kind != "sampled" else None
        if pot is not None and not pot.within_bound(self.physics):
            raise ValueError("potential violates |q A_0| <= m")

    def potential_spec(self) -> PotentialSpec:
        spec = self.potential.spec(self.base_dir)
        if spec.kind == "sampled" and spec.values.shape[1:] != self.grid.n:
            raise ConfigError(f"sampled potential has grid {spec.values.shape[1:]}, expected {self.grid.n}")
        return spec

    def convergence_config(self) -> ConvergenceConfig:
        bump = self.initial.bump if self.initial.kind == "bump" else REFERENCE_BUMP
        return self.convergence.study(bump)

    def resolve_path(self, p: str) -> Path:
        path = Path(p)
        if self.base_dir is not None and not path.is_absolute():
            path = self.base_dir / path
        return path


# coercion -----------------------------------------------------------------


def _fail(where: str, msg: str):
    raise ConfigError(f"{where or 'config'}: {msg}")


def _coerce_scalar(value, kind: type, where: str):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            _fail(where, f"expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            _fail(where, f"expected an integer, got {value!r}")
        return value
    if kind is str:
        if not isinstance(value, str):
            _fail(where, f"expected a string, got {value!r}")
        return value
    _fail(where, f"unsupported type {kind}")


def _coerce_sequence(value, where: str, item: type | None):
    if not isinstance(value, (list, tuple)):
        _fail(where, f"expected an array, got {value!r}")
    out = []
    for i, v in enumerate(value):
        w = f"{where}[{i}]"
        if isinstance(v, (list, tuple)):
            out.append(_coerce_sequence(v, w, None))
        elif item is not None:
            out.append(_coerce_scalar(v, item, w))
        elif isinstance(v, str):
            out.append(v)
        else:
            out.append(_coerce_scalar(v, float, w))
    return tuple(out)


def _coerce(value, hint, where: str):
    origin = typing.get_origin(hint)
    if origin in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(hint) if a is not type(None)]
        return _coerce(value, args[0], where)
    if dataclasses.is_dataclass(hint):
        if not isinstance(value, dict):
            _fail(where, "expected a table")
        return _build(hint, value, where)
    if hint is tuple or origin is tuple:
        args = [a for a in typing.get_args(hint) if a is not Ellipsis]
        item = args[0] if args and all(a is args[0] for a in args) else None
        return _coerce_sequence(value, where, item)
    if hint is Path:
        return Path(_coerce_scalar(value, str, where))
    return _coerce_scalar(value, hint, where)


def _build(cls, table: dict, where: str):
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls) if f.init and f.name != "base_dir"}
    unknown = sorted(set(table) - names)
    if unknown:
        _fail(where, f"unknown key(s) {', '.join(unknown)}")
    kwargs = {k: _coerce(v, hints[k], f"{where}.{k}" if where else k) for k, v in table.items()}
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        _fail(where, str(exc))


# load / save ----------------------------------------------------------------


def from_dict(data: dict, base_dir: Path | None = None) -> RunConfig:
    cfg = _build(RunConfig, data, "")
    return dataclasses.replace(cfg, base_dir=base_dir) if base_dir is not None else cfg


def loads(text: str, base_dir: Path | None = None) -> RunConfig:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return from_dict(data, base_dir)


def load(path: Path | str) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads(text, base_dir=path.resolve().parent)


def _plain(value):
    if dataclasses.is_dataclass(value):
        out = {}
        for f in dataclasses.fields(value):
            if not f.init or f.name == "base_dir":
                continue
            v = getattr(value, f.name)
            if v is None:
                continue
            out[f.name] = _plain(v)
        return out
    if isinstance(value, (tuple, list)):
        return [_plain(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    return value


def to_dict(cfg: RunConfig) -> dict:
    return _plain(cfg)


def dumps(cfg: RunConfig) -> str:
    return tomli_w.dumps(to_dict(cfg))


def save(cfg: RunConfig, path: Path | str) -> Path:
    path = Path(path)
    path.write_text(dumps(cfg))
    return path


# initial data -------------------------------------------------------------------


def build_initial(cfg: RunConfig) -> SpinorField:
    """The ``t = 0`` field on ``cfg.grid`` described by ``cfg.initial``."""
    from .snapshots import read_snapshot

    ini = cfg.initial
    if ini.kind == "planewave":
        pot = cfg.potential_spec()
        if not pot.is_constant:
            raise ConfigError("plane-wave initial data needs a zero or constant potential")
        qA = cfg.physics.q * pot.constant_value()
        try:
            spec = ini.planewave.spec(qA)
        except ValueError as exc:
            raise ConfigError(f"initial.planewave: {exc}") from exc
        return SpinorField(cfg.grid, spec.eval(cfg.grid.spacetime(0.0), cfg.physics.m), 0.0)
    if ini.kind == "bump":
        return ini.bump.field(cfg.grid)
    path = cfg.resolve_path(ini.file.path)
    try:
        fld = read_snapshot(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read initial snapshot {path}: {exc}") from exc
    if fld.grid.n != cfg.grid.n or not all(math.isclose(a, b) for a, b in zip(fld.grid.extent, cfg.grid.extent)):
        raise ConfigError(f"initial snapshot grid {fld.grid} does not match {cfg.grid}")
    return fld


__all__ = [
    "RunConfig",
    "PotentialConfig",
    "InitialConfig",
    "OutputConfig",
    "HydroConfig",
    "ConvergenceSection",
    "load",
    "loads",
    "save",
    "dumps",
    "from_dict",
    "to_dict",
    "build_initial",
]
