import numpy as np
import pytest

from cl3dirac.algebra import Paravector
from cl3dirac.grid import Grid, SpinorField, integrate, norms, partial


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid((2, 8, 8))
    with pytest.raises(ValueError):
        Grid((8, 8, 8), (1.0, -1.0, 1.0))


def test_spectral_derivative_exact_for_resolved_modes():
    g = Grid((16, 12, 8), (2 * np.pi, 4.0, 3.0))
    x = g.coords
    f = np.sin(3 * x[0]) * np.cos(2 * np.pi * x[1] / 4.0) + np.cos(2 * np.pi * 2 * x[2] / 3.0)
    d0 = partial(f, 0, g)
    d2 = partial(f, 2, g)
    assert np.max(np.abs(d0 - 3 * np.cos(3 * x[0]) * np.cos(2 * np.pi * x[1] / 4.0))) < 1e-12
    assert np.max(np.abs(d2 + (4 * np.pi / 3.0) * np.sin(4 * np.pi * x[2] / 3.0))) < 1e-12


def test_nyquist_mode_is_annihilated():
    g = Grid((8, 8, 8))
    x = g.coords
    assert np.max(np.abs(partial(np.cos(4 * x[0]), 0, g))) < 1e-12


def test_central4_order():
    errs = []
    for n in (32, 64, 128):
        g = Grid((n, 4, 4))
        x = g.coords
        f = np.exp(np.sin(x[0]))
        errs.append(np.max(np.abs(partial(f, 0, g, "central-4") - np.cos(x[0]) * f)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(orders - 4) < 0.15)


def test_partial_acts_on_trailing_axes():
    g = Grid((8, 8, 8))
    x = g.coords
    arr = np.stack([np.sin(x[1]), np.cos(x[1])])
    d = partial(arr, 1, g)
    assert np.allclose(d[0], np.cos(x[1])) and np.allclose(d[1], -np.sin(x[1]))


def test_integrate_and_norms():
    g = Grid((8, 8, 8), (1.0, 2.0, 3.0))
    assert np.isclose(integrate(np.ones(g.n), g), 6.0)
    f = SpinorField(g, Paravector(np.ones((4,) + g.n, dtype=complex)))
    nm = norms(f)
    assert np.isclose(nm["l2"], np.sqrt(2 * 4 * 6.0))
    assert np.isclose(nm["h1"], nm["l2"])


def test_field_validation():
    g = Grid((8, 8, 8))
    with pytest.raises(ValueError):
        SpinorField(g, Paravector(np.ones((4, 4, 8, 8), dtype=complex)))
    bad = np.ones((4,) + g.n, dtype=complex)
    bad[0, 0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        SpinorField(g, Paravector(bad))
