import numpy as np
import pytest
from conftest import periodic_plane_wave, plane_wave_fields

from cl3dirac import algebra as al
from cl3dirac.errors import InsufficientSnapshots
from cl3dirac.evolution import SchemeConfig, evolve
from cl3dirac.grid import Grid, SpinorField
from cl3dirac.hydro import (
    analyse,
    chiral_lightlike_check,
    currents,
    epsilon_identity_defect,
    quantization_residual,
    t_expression_residual,
    fd_weights,
    make_window,
    non_dirac_state,
    orthogonality_defect,
    quantization_from_hydro,
    residual_norms,
    residual_table,
    structural_defects,
    tetrode,
    tetrode_null_form,
    window_residuals,
)
from cl3dirac.initial import REFERENCE_BUMP, random_smooth_field
from cl3dirac.spinor import PhysicsParams, PotentialSpec, dirac_current

G = Grid((16, 16, 16))
PARAMS = PhysicsParams(1.0, 0.5, 0.1)
POT = PotentialSpec("constant", np.array([0.2, 0.1, 0.0, -0.3]))


def test_fd_weights():
    assert np.allclose(fd_weights([0, 1, 2], 1), [-0.5, 0.0, 0.5])
    assert np.allclose(fd_weights([0, 1, 2], 0), [-1.5, 2.0, -0.5])
    w = fd_weights(range(5), 2)
    assert np.isclose(w @ np.arange(5.0) ** 3, 3 * 2.0**2)


def test_currents_sum_and_dirac_current(rng):
    phi = al.random_paravector(rng, (50,))
    cs = currents(phi)
    assert np.allclose(cs.D[0], dirac_current(phi).coeffs.real)
    assert np.allclose(cs.j_L + cs.j_R, cs.D[0])
    # D_3 = phi e3 phi^dagger = j_L - j_R
    assert np.allclose(cs.j_L - cs.j_R, cs.D[3])


def test_pointwise_structure_on_random_spinors(rng):
    phi = al.random_paravector(rng, (2000,))
    assert np.max(orthogonality_defect(phi)) < 1e-12
    light = chiral_lightlike_check(phi)
    assert max(np.nanmax(light["R"]), np.nanmax(light["L"])) < 1e-12


def test_structural_defects_random_fields(rng):
    for _ in range(3):
        snap = analyse(random_smooth_field(G, rng), POT, PARAMS)
        for (law, s), (err, frac) in structural_defects(snap).items():
            assert err < 1e-11, (law, s, err)
            assert frac == 0.0


def test_tetrode_null_form_matches(rng):
    f = random_smooth_field(Grid((8, 8, 8)), rng)
    snap = analyse(f, POT, PARAMS)
    from cl3dirac.hydro import field_derivatives

    dphi = field_derivatives(f, POT.on_grid(f.grid.n), PARAMS)
    for s in ("R", "L"):
        a = tetrode(f.data, dphi, snap.gamma_low, s)
        b = tetrode_null_form(f.data, dphi, snap.gamma_low, s)
        assert np.max(np.abs(a - b)) <= 1e-11 * max(1.0, np.max(np.abs(a)))


@pytest.mark.parametrize("law", [t_expression_residual, epsilon_identity_defect, quantization_residual])
def test_kinematic_identities_on_resolved_field(law):
    # v = j / rho is not band-limited, so use a smooth field that 32^3 resolves
    g = Grid((32, 32, 32))
    snap = analyse(REFERENCE_BUMP.field(g), POT, PARAMS)
    for s in ("R", "L"):
        assert np.max(np.abs(law(snap, s))) < 1e-10


def test_plane_wave_window_residuals_vanish():
    spec = periodic_plane_wave()
    fields = plane_wave_fields(spec, G)
    win = make_window(fields, PotentialSpec(), PhysicsParams(1.0, 0.0, 0.1), width=7, dphi_dt="equation")
    for row in residual_table(win):
        if row["norm_type"] == "l2":
            assert row["value"] <= 1e-10, row


def test_plane_wave_with_constant_potential():
    pot = PotentialSpec("constant", np.array([0.3, 0.0, 0.0, 0.0]))
    params = PhysicsParams(1.0, 1.0, 0.1)
    from cl3dirac.initial import PlaneWaveInit

    # velocity (1, 0, -1) still gives an integer covector once q A_0 shifts the phase
    spec = PlaneWaveInit(N=1.3, velocity=(1.0, 0.0, -1.0), beta=0.2).spec(params.q * pot.constant_value())
    fields = plane_wave_fields(spec, G)
    win = make_window(fields, pot, params, width=7, dphi_dt="equation")
    assert max(r["value"] for r in residual_table(win) if r["norm_type"] == "l2") <= 1e-10


def test_window_validation():
    spec = periodic_plane_wave()
    fields = plane_wave_fields(spec, Grid((8, 8, 8)), count=3)
    with pytest.raises(InsufficientSnapshots):
        make_window(fields[:2], PotentialSpec(), PARAMS)
    bad = fields[:2] + [SpinorField(fields[2].grid, fields[2].data, 1.0)]
    with pytest.raises(InsufficientSnapshots):
        make_window(bad, PotentialSpec(), PARAMS)
    with pytest.raises(ValueError):
        make_window(fields, PotentialSpec(), PARAMS, width=4)


def test_bump_residuals_small_and_structural_on_snapshots():
    g = Grid((16, 16, 16))
    tr = evolve(REFERENCE_BUMP.field(g), POT, PARAMS, SchemeConfig(dt=0.02, t_end=0.1, mode="nonlinear-exact"))
    for f in tr.snapshots:
        for key, (err, _) in structural_defects(analyse(f, POT, PARAMS)).items():
            assert err < 1e-11, key
    win = make_window(tr.snapshots, POT, PARAMS, "spectral", width=5)
    res = window_residuals(win)
    assert set(k[0] for k in res) >= {"firp_D0", "mome", "current", "result", "quco", "hyd_momentum"}
    # spectral in space, fourth order in time at dt = 0.02
    worst = max(residual_norms(r, np.zeros(g.n, bool), g)["linf"] for r in res.values())
    assert worst < 1e-3


def test_quantization_has_power():
    state = non_dirac_state(G, amplitude=1.0)
    r = quantization_from_hydro(state["v"], state["u"], state["gamma_low"], G)
    # eps^{imn} with raised indices is -eps_{imn}, so this is minus curl u = cos(y) e_z
    x = G.coords
    assert np.allclose(r[2], np.cos(x[1]), atol=1e-12)
    assert np.allclose(r[:2], 0.0, atol=1e-12)
    nm = residual_norms(r, np.zeros(G.n, bool), G)
    assert nm["l2"] > 1.0


def test_masking_at_nodes():
    g = Grid((8, 8, 8))
    c = np.zeros((4,) + g.n, dtype=complex)
    c[0] = 1.0
    c[3] = np.where(g.coords[0] < np.pi, 1.0, 0.3)  # left half is a node (det = 0)
    f = SpinorField(g, al.Paravector(c))
    snap = analyse(f, PotentialSpec(), PARAMS)
    assert np.isclose(np.mean(snap.nodes), 0.5)
    d = structural_defects(snap)
    assert np.isclose(d[("orthogonality", "-")][1], 0.5)
    assert all(np.isfinite(v[0]) for v in d.values())
