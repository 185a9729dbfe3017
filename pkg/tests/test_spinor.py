import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cl3dirac import algebra as al
from cl3dirac.errors import InconsistentPair, NodalPoint
from cl3dirac.matrix import from_matrix
from cl3dirac.spinor import (
    PhysicsParams,
    PlaneWaveSpec,
    PotentialSpec,
    chiral_currents,
    dirac_current,
    node_mask,
    nonlinear_residual,
    nonlinearity_N,
    pilot_velocity,
    random_psd_pair,
    reconstruct_M,
    reg_source,
    reg_velocity,
    velocity_current,
)

from conftest import close, paravectors

vel3 = st.lists(st.floats(min_value=-2, max_value=2, allow_nan=False), min_size=3, max_size=3).map(np.array)
angles = st.floats(min_value=-np.pi, max_value=np.pi, allow_nan=False)


def test_params_validation():
    with pytest.raises(ValueError):
        PhysicsParams(m=-1.0)
    with pytest.raises(ValueError):
        PhysicsParams(lam=-0.1)


def test_currents_add_up():
    rng = np.random.default_rng(0)
    phi = al.random_paravector(rng, (50,))
    jl, jr = chiral_currents(phi)
    assert close(jl + jr, dirac_current(phi), 1e-13)
    assert np.all(dirac_current(phi).coeffs.imag == 0)


@given(paravectors())
def test_pilot_velocity_unimodular(phi):
    if node_mask(phi, 1e-6):
        with pytest.raises(NodalPoint):
            pilot_velocity(phi, 1e-6)
        return
    V = pilot_velocity(phi)
    v = V.coeffs.real
    assert abs(al.det(V) - 1) <= 1e-9
    assert v[0] > 0


def test_node_mask_zero():
    assert node_mask(al.Paravector.zeros())
    assert not node_mask(al.E0)


def test_reg_velocity_at_zero_and_lam_zero():
    assert reg_velocity(al.Paravector.zeros(), 0.1) == 0
    phi = 2.0 * np.exp(0.7j) * al.E0
    assert np.isclose(reg_velocity(phi, 0.0), np.exp(-1.4j))


@given(paravectors(), st.floats(min_value=0.0, max_value=10.0))
def test_reg_velocity_bounded(phi, lam):
    assert abs(reg_velocity(phi, lam)) <= 1.0 + 1e-15


def test_reg_velocity_bounded_on_rays():
    rng = np.random.default_rng(3)
    phi = al.random_paravector(rng, (1000,))
    for s in (1e-300, 1e-150, 1e-20, 1.0, 1e100):
        assert np.all(np.abs(reg_velocity(s * phi, 0.1)) <= 1.0)
        assert np.all(np.isfinite(reg_source(s * phi, 0.1).coeffs))


def test_reconstruct_examples():
    assert close(reconstruct_M(1.0, al.E0), al.E0, 1e-15)
    N, J = 1.0, al.Paravector.from_coeffs(np.sqrt(1 + 0.25), 0, 0, 0.5)
    M = reconstruct_M(N, J)
    assert close(al.mul(M, al.dagger(M)), J, 1e-12)
    assert close(M, al.dagger(M), 0)
    m = np.array([[M.coeffs[0] + M.coeffs[3], 0], [0, M.coeffs[0] - M.coeffs[3]]])
    assert np.all(np.linalg.eigvalsh(m) > 0)


def test_reconstruct_inconsistent():
    with pytest.raises(InconsistentPair):
        reconstruct_M(1.0, al.Paravector.from_coeffs(1, 0, 0, 0.5))
    with pytest.raises(InconsistentPair):
        reconstruct_M(1.0, al.Paravector.from_coeffs(1, 1j, 0, 0))
    with pytest.raises(InconsistentPair):
        reconstruct_M(0.0, al.Paravector.from_coeffs(-1, 0, 0, 1))
    assert close(reconstruct_M(0.0, al.Paravector.zeros()), al.Paravector.zeros(), 0)


def test_reconstruct_lightlike():
    J = al.Paravector.from_coeffs(1, 0, 0, 1)
    M = reconstruct_M(0.0, J)
    assert close(al.mul(M, al.dagger(M)), J, 1e-15)


@given(st.integers(min_value=0, max_value=2**31))
def test_reconstruct_round_trip(seed):
    N, J = random_psd_pair(np.random.default_rng(seed))
    M = reconstruct_M(N, J)
    scale = max(1.0, float(J.coeffs[0].real))
    assert close(al.mul(M, al.dagger(M)), J, 1e-10)
    assert abs(abs(al.det(M)) - N) <= 1e-10 * scale


def _sample_points(rng, n=16):
    return rng.uniform(-3, 3, size=(4, n))


@given(vel3, st.floats(min_value=0.2, max_value=3.0), angles, angles, st.floats(min_value=0.1, max_value=2.0))
def test_plane_wave_solves_exact_equation(v, N, beta, phi0, m):
    N, J = velocity_current(v, N)
    spec = PlaneWaveSpec.from_current(N, J, phi0, beta)
    params = PhysicsParams(m=m, q=0.0, lam=0.0)
    x = _sample_points(np.random.default_rng(0))
    phi = spec.eval(x, m)
    dphi = [al.hat(d) for d in spec.derivatives(x, m)]
    res = nonlinear_residual(phi, dphi, al.Paravector.zeros(x.shape[1:]), params, "exact")
    assert np.max(np.abs(res.coeffs)) <= 1e-12 * max(1.0, m * N * (1 + v @ v))
    V = spec.V.coeffs.real
    assert abs(al.det(spec.V) - 1) <= 1e-12 * V[0] ** 2
    assert abs(V[0] - np.sqrt(1 + V[1:] @ V[1:])) <= 1e-12 * V[0]


def test_plane_wave_constant_potential():
    params = PhysicsParams(m=1.0, q=0.5, lam=0.1)
    A = np.array([0.3, 2.0, 0.0, -2.0])
    N, J = velocity_current(np.array([0.2, -0.4, 0.1]), 1.1)
    spec = PlaneWaveSpec.from_current(N, J, 0.1, 0.7, qA=params.q * A)
    x = _sample_points(np.random.default_rng(1))
    phi = spec.eval(x, params.m)
    dphi = [al.hat(d) for d in spec.derivatives(x, params.m)]
    Ag = al.Paravector(np.broadcast_to(A.reshape(4, 1), x.shape).astype(complex))
    res = nonlinear_residual(phi, dphi, Ag, params, "exact")
    assert np.max(np.abs(res.coeffs)) <= 1e-12
    # without the q A phase shift the same field is not a solution
    bare = PlaneWaveSpec(spec.M, 0.1)
    phi_b = bare.eval(x, params.m)
    res_b = nonlinear_residual(phi_b, [al.hat(d) for d in bare.derivatives(x, params.m)], Ag, params, "exact")
    assert np.max(np.abs(res_b.coeffs)) > 1e-2


def test_plane_wave_derivatives_match_finite_differences():
    spec = PlaneWaveSpec.from_current(*velocity_current(np.array([0.5, 0.2, -0.7]), 1.4), 0.3, 0.9)
    x = _sample_points(np.random.default_rng(2), 5)
    h = 1e-4
    an = spec.derivatives(x, 1.3)
    for mu in range(4):
        e = np.zeros((4, 1))
        e[mu] = 1
        fd = (
            -spec.eval(x + 2 * h * e, 1.3).coeffs
            + 8 * spec.eval(x + h * e, 1.3).coeffs
            - 8 * spec.eval(x - h * e, 1.3).coeffs
            + spec.eval(x - 2 * h * e, 1.3).coeffs
        ) / (12 * h)
        assert np.max(np.abs(fd - an[mu].coeffs)) < 1e-9


def test_plane_wave_rest_frame():
    spec = PlaneWaveSpec(al.E0)
    x = np.zeros((4, 3))
    x[0] = [0.0, 0.5, 1.0]
    phi = spec.eval(x, 2.0)
    # phi = exp(-i m t e3) at rest
    assert np.allclose(phi.coeffs[0], np.cos(2.0 * x[0]))
    assert np.allclose(phi.coeffs[3], -1j * np.sin(2.0 * x[0]))
    assert np.allclose(nonlinearity_N(phi), 1.0)


def test_nodal_prefactor_rejected():
    with pytest.raises(NodalPoint):
        PlaneWaveSpec(al.E0 + al.E3)


def test_regularized_matches_exact_for_small_lambda():
    rng = np.random.default_rng(5)
    phi = al.random_paravector(rng, (20,))
    d = [al.random_paravector(rng, (20,)) for _ in range(4)]
    A = al.Paravector.zeros((20,))
    p0 = PhysicsParams(1.0, 0.0, 0.0)
    ex = nonlinear_residual(phi, d, A, p0, "exact")
    rg = nonlinear_residual(phi, d, A, p0, "regularized")
    assert close(ex, rg, 1e-12)


def test_potential_spec_validation():
    with pytest.raises(ValueError):
        PotentialSpec("constant", np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        PotentialSpec("constant", np.array([1j, 0, 0, 0]))
    with pytest.raises(ValueError):
        PotentialSpec("nope")
    s = PotentialSpec("sampled", np.ones((4, 4, 4, 4)))
    assert s.is_constant and np.allclose(s.constant_value(), 1)
    assert PotentialSpec().on_grid((4, 4, 4)).batch_shape == (4, 4, 4)
    assert not PotentialSpec("constant", np.array([3.0, 0, 0, 0])).within_bound(PhysicsParams(1.0, 0.5))


def test_rank_one_elements_are_nodes():
    a = np.array([1.0 + 0.5j, -0.3j])
    b = np.array([0.2, 1.0 - 1j])
    p = from_matrix(np.outer(a, b.conj()))
    assert node_mask(p)
    assert nonlinearity_N(p) < 1e-15


@pytest.mark.parametrize("scale", [1e-300, 1e-160, 1e-20, 1.0, 1e150])
def test_reg_velocity_scale_invariant(scale):
    rng = np.random.default_rng(5)
    phi = al.random_paravector(rng, (100,))
    for lam in (1.0, 0.01):
        ref = reg_velocity(phi, lam)
        v = reg_velocity(al.Paravector(phi.coeffs * scale), lam)
        assert np.all(np.isfinite(v)) and np.all(np.abs(v) <= 1.0)
        assert np.allclose(v, ref, rtol=1e-12, atol=1e-14)
