"""Initial data: plane waves and localized bumps on a constant background."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import Paravector
from .grid import Grid, SpinorField
from .spinor import PlaneWaveSpec, velocity_current


def _complex4(re, im) -> np.ndarray:
    re = np.asarray(re, dtype=float)
    im = np.asarray(im, dtype=float)
    if re.shape != (4,) or im.shape != (4,):
        raise ValueError("expected four real and four imaginary parts")
    return re + 1j * im


@dataclass(frozen=True)
class PlaneWaveInit:
    """Plane wave from ``(N, J)`` or from ``N`` and a spatial velocity.

    Give either ``J`` (four reals, upper components) or ``velocity`` (three
    reals; ``J = N (sqrt(1 + |v|^2), v)``).  ``beta`` is the global phase
    ``det(M) = N e^{i beta}``.
    """

    N: float = 1.0
    J: tuple | None = None
    velocity: tuple | None = None
    phi0: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if (self.J is None) == (self.velocity is None):
            raise ValueError("give exactly one of J or velocity")

    def spec(self, qA=(0.0, 0.0, 0.0, 0.0)) -> PlaneWaveSpec:
        if self.velocity is not None:
            N, J = velocity_current(np.asarray(self.velocity, float), self.N)
        else:
            N, J = self.N, Paravector(np.asarray(self.J, dtype=np.complex128))
        return PlaneWaveSpec.from_current(N, J, self.phi0, self.beta, qA)


@dataclass(frozen=True)
class BumpInit:
    """``phi = M0 (1 + a b(x)) + c M1 b(x)`` with the periodic bump
    ``b = exp((sum_k cos(2 pi (x_k - x0_k)/L_k) - 3) / width)``.
    """

    background_re: tuple = (1.0, 0.0, 0.0, 0.0)
    background_im: tuple = (0.0, 0.0, 0.0, 0.0)
    mode_re: tuple = (0.0, 0.0, 0.0, 0.0)
    mode_im: tuple = (0.0, 0.0, 0.0, 0.0)
    amplitude: float = 0.3
    mode_amplitude: float = 0.0
    width: float = 1.0
    center: tuple | None = None

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("bump width must be positive")
        _complex4(self.background_re, self.background_im)
        _complex4(self.mode_re, self.mode_im)

    def bump(self, grid: Grid) -> np.ndarray:
        x = grid.coords
        L = np.array(grid.extent).reshape(3, 1, 1, 1)
        x0 = np.array(self.center if self.center is not None else np.array(grid.extent) / 2).reshape(3, 1, 1, 1)
        s = np.sum(np.cos(2 * np.pi * (x - x0) / L), axis=0)
        return np.exp((s - 3.0) / self.width)

    def field(self, grid: Grid) -> SpinorField:
        b = self.bump(grid)
        M0 = _complex4(self.background_re, self.background_im).reshape(4, 1, 1, 1)
        M1 = _complex4(self.mode_re, self.mode_im).reshape(4, 1, 1, 1)
        c = M0 * (1 + self.amplitude * b) + self.mode_amplitude * M1 * b
        return SpinorField(grid, Paravector(c))


# the reference bump used by the convergence study and the acceptance suite
REFERENCE_BUMP = BumpInit(
    background_re=(np.cos(0.35), 0.2 * np.cos(0.35), -0.1 * np.cos(0.35), 0.3 * np.cos(0.35)),
    background_im=(np.sin(0.35), 0.2 * np.sin(0.35), -0.1 * np.sin(0.35), 0.3 * np.sin(0.35)),
    mode_re=(0.3, 0.0, 0.4, 0.0),
    mode_im=(0.0, 0.5, 0.0, -0.2),
    amplitude=0.3,
    mode_amplitude=0.4,
    width=2.0,
)


def random_smooth_field(grid: Grid, rng: np.random.Generator, modes: int = 2, decay: float = 1.0) -> SpinorField:
    """Random band-limited field: Fourier modes ``|k_i| <= modes`` with Gaussian
    amplitudes damped by ``exp(-decay |k|^2 / 2)``, plus a random constant."""
    ks = np.arange(-modes, modes + 1)
    x = grid.coords
    L = np.array(grid.extent).reshape(3, 1, 1, 1)
    c = (rng.normal(size=(4, 1, 1, 1)) + 1j * rng.normal(size=(4, 1, 1, 1))) * np.ones(grid.n)
    for k in np.array(np.meshgrid(ks, ks, ks, indexing="ij")).reshape(3, -1).T:
        if not np.any(k):
            continue
        amp = np.exp(-decay * float(k @ k) / 2) * (rng.normal(size=4) + 1j * rng.normal(size=4))
        phase = np.exp(1j * np.sum(2 * np.pi * k.reshape(3, 1, 1, 1) * x / L, axis=0))
        c = c + amp.reshape(4, 1, 1, 1) * phase
    return SpinorField(grid, Paravector(c))


@dataclass(frozen=True)
class FileInit:
    path: str = field(default="")


__all__ = ["PlaneWaveInit", "BumpInit", "FileInit", "REFERENCE_BUMP", "random_smooth_field"]
