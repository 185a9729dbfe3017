import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from cl3dirac.algebra import Paravector

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

coef = st.floats(min_value=-5, max_value=5, allow_nan=False, allow_infinity=False)
complex_coef = st.builds(complex, coef, coef)


@st.composite
def paravectors(draw, real: bool = False):
    if real:
        cs = draw(st.lists(coef, min_size=4, max_size=4))
    else:
        cs = draw(st.lists(complex_coef, min_size=4, max_size=4))
    return Paravector(np.array(cs, dtype=np.complex128))


def close(a, b, tol=1e-12):
    a = a.coeffs if isinstance(a, Paravector) else np.asarray(a)
    b = b.coeffs if isinstance(b, Paravector) else np.asarray(b)
    scale = max(1.0, float(np.max(np.abs(b))) if np.size(b) else 1.0)
    return float(np.max(np.abs(a - b))) <= tol * scale if np.size(a) else True


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def plane_wave_fields(spec, grid, m=1.0, count=7, dt=5e-3, t0=0.0):
    """Analytic snapshots of a plane wave at equally spaced times."""
    from cl3dirac.grid import SpinorField

    return [SpinorField(grid, spec.eval(grid.spacetime(t0 + i * dt), m), t0 + i * dt) for i in range(count)]


def periodic_plane_wave(beta=0.7, phi0=0.4, N=1.3):
    """Plane wave whose spatial covector is an integer vector (periodic in a 2 pi box)."""
    from cl3dirac.spinor import PlaneWaveSpec, velocity_current

    n, J = velocity_current(np.array([1.0, 0.0, -1.0]), N)
    return PlaneWaveSpec.from_current(n, J, phi0, beta)


ACCEPTANCE: dict[int, str] = {}


def report(criterion: int, ok: bool, detail: str) -> None:
    """Record and print one acceptance line."""
    line = f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[criterion] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
