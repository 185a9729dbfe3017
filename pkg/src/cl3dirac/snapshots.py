"""Snapshot serialization.

Binary layout (all little-endian)::

    magic      4 bytes  b"CL3S"
    version    uint32   1
    n          3 x uint32   points per axis
    extent     3 x float64  box lengths
    t          float64
    data       n_x n_y n_z x 8 float64

Points are stored row-major with z fastest; each point holds
``Re c0, Im c0, Re c1, Im c1, Re c2, Im c2, Re c3, Im c3``.
"""
from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .algebra import Paravector
from .grid import Grid, SpinorField

MAGIC = b"CL3S"
VERSION = 1
_HEADER = struct.Struct("<4sI3I3dd")
CSV_COLUMNS = ["t", "i", "j", "k", "x", "y", "z", "re0", "im0", "re1", "im1", "re2", "im2", "re3", "im3"]


class SnapshotFormatError(ValueError):
    pass


def _reals(field: SpinorField) -> np.ndarray:
    c = np.moveaxis(field.data.coeffs, 0, -1)  # (nx, ny, nz, 4)
    out = np.empty(c.shape[:-1] + (8,), dtype="<f8")
    out[..., 0::2] = c.real
    out[..., 1::2] = c.imag
    return out


def _from_reals(r: np.ndarray) -> np.ndarray:
    c = r[..., 0::2] + 1j * r[..., 1::2]
    return np.moveaxis(c, -1, 0)


def to_bytes(field: SpinorField) -> bytes:
    g = field.grid
    head = _HEADER.pack(MAGIC, VERSION, *g.n, *g.extent, float(field.t))
    return head + np.ascontiguousarray(_reals(field)).tobytes(order="C")


def from_bytes(buf: bytes) -> SpinorField:
    if len(buf) < _HEADER.size:
        raise SnapshotFormatError("truncated header")
    magic, version, nx, ny, nz, lx, ly, lz, t = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise SnapshotFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotFormatError(f"unsupported version {version}")
    expected = _HEADER.size + nx * ny * nz * 8 * 8
    if len(buf) != expected:
        raise SnapshotFormatError(f"expected {expected} bytes, got {len(buf)}")
    r = np.frombuffer(buf, dtype="<f8", offset=_HEADER.size).reshape(nx, ny, nz, 8)
    grid = Grid((nx, ny, nz), (lx, ly, lz))
    return SpinorField(grid, Paravector(_from_reals(r)), t)


def write_bin(field: SpinorField, path: Path | str) -> Path:
    path = Path(path)
    path.write_bytes(to_bytes(field))
    return path


def read_bin(path: Path | str) -> SpinorField:
    return from_bytes(Path(path).read_bytes())


def write_csv(field: SpinorField, path: Path | str) -> Path:
    """One row per point; floats use 17 significant digits, which round-trips."""
    path = Path(path)
    g = field.grid
    idx = np.indices(g.n).reshape(3, -1).T
    xyz = g.coords.reshape(3, -1).T
    r = _reals(field).reshape(-1, 8)
    with path.open("w", newline="") as fh:
        fh.write(f"# extent {g.extent[0]!r} {g.extent[1]!r} {g.extent[2]!r}\n")
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        t = repr(float(field.t))
        for (i, j, k), (x, y, z), vals in zip(idx, xyz, r):
            w.writerow([t, i, j, k, repr(float(x)), repr(float(y)), repr(float(z))] + [repr(float(v)) for v in vals])
    return path


def read_csv(path: Path | str) -> SpinorField:
    path = Path(path)
    with path.open() as fh:
        first = fh.readline()
        if not first.startswith("# extent"):
            raise SnapshotFormatError("missing extent line")
        extent = tuple(float(x) for x in first.split()[2:5])
        rows = list(csv.reader(fh))
    if not rows or rows[0] != CSV_COLUMNS:
        raise SnapshotFormatError("bad CSV header")
    body = rows[1:]
    ijk = np.array([[int(r[1]), int(r[2]), int(r[3])] for r in body])
    n = tuple(int(v) for v in ijk.max(axis=0) + 1)
    vals = np.empty(n + (8,))
    for r, (i, j, k) in zip(body, ijk):
        vals[i, j, k] = [float(v) for v in r[7:]]
    t = float(body[0][0])
    return SpinorField(Grid(n, extent), Paravector(_from_reals(vals)), t)


def snapshot_name(index: int, fmt: str) -> str:
    return f"snap_{index:06d}.{fmt}"


def write_snapshot(field: SpinorField, directory: Path | str, index: int, fmt: str = "bin") -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    if fmt == "bin":
        return write_bin(field, d / snapshot_name(index, "bin"))
    if fmt == "csv":
        return write_csv(field, d / snapshot_name(index, "csv"))
    raise ValueError(f"unknown format {fmt!r}")


def read_snapshot(path: Path | str) -> SpinorField:
    p = Path(path)
    if p.suffix == ".bin":
        return read_bin(p)
    if p.suffix == ".csv":
        return read_csv(p)
    raise SnapshotFormatError(f"unknown snapshot suffix {p.suffix!r}")


def load_directory(directory: Path | str) -> list[SpinorField]:
    """All ``snap_*`` files in a directory, ordered by time (binary preferred)."""
    d = Path(directory)
    if not d.is_dir():
        raise FileNotFoundError(f"no snapshot directory {d}")
    by_stem: dict[str, Path] = {}
    for p in sorted(d.glob("snap_*.csv")) + sorted(d.glob("snap_*.bin")):
        by_stem[p.stem] = p
    fields = [read_snapshot(p) for _, p in sorted(by_stem.items())]
    return sorted(fields, key=lambda f: f.t)


__all__ = [
    "MAGIC",
    "VERSION",
    "to_bytes",
    "from_bytes",
    "write_bin",
    "read_bin",
    "write_csv",
    "read_csv",
    "write_snapshot",
    "read_snapshot",
    "load_directory",
    "SnapshotFormatError",
]
