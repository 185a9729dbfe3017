import dataclasses

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cl3dirac import config as cfgmod
from cl3dirac.errors import ConfigError
from cl3dirac.grid import Grid
from cl3dirac.initial import random_smooth_field
from cl3dirac.snapshots import (
    SnapshotFormatError,
    from_bytes,
    load_directory,
    read_snapshot,
    to_bytes,
    write_snapshot,
)


@pytest.fixture
def field(rng):
    f = random_smooth_field(Grid((4, 5, 6), (1.0, 2.5, np.pi)), rng)
    return dataclasses.replace(f, t=0.123456789012345)


@pytest.mark.parametrize("fmt", ["bin", "csv"])
def test_snapshot_round_trip_bit_exact(tmp_path, field, fmt):
    p = write_snapshot(field, tmp_path, 3, fmt)
    assert p.name == f"snap_000003.{fmt}"
    back = read_snapshot(p)
    assert back.grid == field.grid
    assert back.t == field.t
    assert np.array_equal(back.data.coeffs, field.data.coeffs)


def test_binary_header_checks(field):
    buf = to_bytes(field)
    with pytest.raises(SnapshotFormatError):
        from_bytes(b"XXXX" + buf[4:])
    with pytest.raises(SnapshotFormatError):
        from_bytes(buf[:-8])
    with pytest.raises(SnapshotFormatError):
        from_bytes(buf[:10])
    with pytest.raises(SnapshotFormatError):
        read_snapshot("a.txt")


def test_load_directory_orders_by_time(tmp_path, field):
    for i, t in enumerate([0.3, 0.1, 0.2]):
        write_snapshot(dataclasses.replace(field, t=t), tmp_path, i, "bin")
    write_snapshot(dataclasses.replace(field, t=0.1), tmp_path, 1, "csv")
    fs = load_directory(tmp_path)
    assert [f.t for f in fs] == [0.1, 0.2, 0.3]
    with pytest.raises(FileNotFoundError):
        load_directory(tmp_path / "missing")


EXAMPLE = """
seed = 3

[physics]
m = 1.0
q = 0.5
lam = 0.1

[grid]
n = [8, 8, 8]

[scheme]
t_end = 0.2
dt = 0.05
mode = "nonlinear-regularized"

[potential]
kind = "constant"
values = [0.2, 0.1, 0.0, -0.3]

[initial]
kind = "planewave"

[initial.planewave]
N = 1.3
velocity = [1.0, 0.0, -1.0]
beta = 0.5

[output]
formats = ["bin", "csv"]
"""


def test_load_example_and_round_trip(tmp_path):
    cfg = cfgmod.loads(EXAMPLE)
    assert cfg.seed == 3 and cfg.grid.n == (8, 8, 8)
    assert cfg.scheme.dt == 0.05
    assert cfg.initial.planewave.velocity == (1.0, 0.0, -1.0)
    assert cfgmod.loads(cfgmod.dumps(cfg)) == cfg
    path = cfgmod.save(cfg, tmp_path / "c.toml")
    assert cfgmod.load(path) == cfg


@pytest.mark.parametrize(
    "text,needle",
    [
        ("[physics]\nmass = 1.0\n", "unknown key"),
        ("[nonsense]\n", "unknown key"),
        ("[physics]\nm = 'one'\n", "expected a number"),
        ("[grid]\nn = [8, 8]\n", "grid"),
        ("[physics]\nm = -1.0\n", "physics"),
        ("[scheme]\nmethod = 'euler'\n", "scheme"),
        ("[hydro]\nwindow = 4\n", "window"),
        ("[convergence]\nresolutions = [16.5, 32]\n", "resolutions"),
        ("[physics]\nq = 1.0\n[potential]\nkind = 'constant'\nvalues = [5.0, 0, 0, 0]\n", "q A_0"),
        ("[physics\n", "malformed"),
    ],
)
def test_config_errors(text, needle):
    with pytest.raises(ConfigError, match=needle):
        cfgmod.loads(text)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        cfgmod.load(tmp_path / "none.toml")


@given(
    m=st.floats(0.1, 5.0),
    lam=st.floats(0.001, 2.0),
    n=st.lists(st.integers(4, 64), min_size=3, max_size=3),
    t_end=st.floats(0.0, 10.0),
    stride=st.integers(1, 50),
    kind=st.sampled_from(["planewave", "bump"]),
)
def test_config_round_trip_property(m, lam, n, t_end, stride, kind):
    data = {
        "physics": {"m": m, "lam": lam},
        "grid": {"n": n},
        "scheme": {"t_end": t_end},
        "output": {"stride": stride},
        "initial": {"kind": kind},
    }
    cfg = cfgmod.from_dict(data)
    assert cfgmod.loads(cfgmod.dumps(cfg)) == cfg


def test_build_initial_variants(tmp_path):
    cfg = cfgmod.loads(EXAMPLE)
    f = cfgmod.build_initial(cfg)
    assert f.grid.n == (8, 8, 8) and f.t == 0.0
    bump = dataclasses.replace(cfg, initial=cfgmod.InitialConfig(kind="bump"))
    assert np.all(np.isfinite(cfgmod.build_initial(bump).data.coeffs))
    write_snapshot(f, tmp_path, 0)
    from_file = cfgmod.loads(EXAMPLE.replace('kind = "planewave"', 'kind = "file"') + '\n[initial.file]\npath = "snap_000000.bin"\n', base_dir=tmp_path)
    assert np.array_equal(cfgmod.build_initial(from_file).data.coeffs, f.data.coeffs)
    wrong = dataclasses.replace(from_file, grid=Grid((4, 4, 4)))
    with pytest.raises(ConfigError):
        cfgmod.build_initial(wrong)


def test_sampled_potential(tmp_path):
    vals = np.zeros((4, 8, 8, 8))
    np.save(tmp_path / "A.npy", vals)
    cfg = cfgmod.loads('[grid]\nn = [8, 8, 8]\n[potential]\nkind = "sampled"\nfile = "A.npy"\n', base_dir=tmp_path)
    assert cfg.potential_spec().kind == "sampled"
    bad = dataclasses.replace(cfg, grid=Grid((4, 4, 4)))
    with pytest.raises(ConfigError):
        bad.potential_spec()
