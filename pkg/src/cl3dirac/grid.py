"""Periodic grids, spinor fields and spatial derivative operators."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .algebra import Paravector, frobenius_norm2

DERIVATIVES = ("spectral", "central-4")


@dataclass(frozen=True)
class Grid:
    n: tuple[int, int, int] = (32, 32, 32)
    extent: tuple[float, float, float] = (2 * np.pi, 2 * np.pi, 2 * np.pi)

    def __post_init__(self):
        object.__setattr__(self, "n", tuple(int(k) for k in self.n))
        object.__setattr__(self, "extent", tuple(float(L) for L in self.extent))
        if len(self.n) != 3 or len(self.extent) != 3:
            raise ValueError("grid needs three axes")
        if min(self.n) < 4:
            raise ValueError("need at least 4 points per axis")
        if min(self.extent) <= 0:
            raise ValueError("box lengths must be positive")

    @property
    def spacing(self) -> np.ndarray:
        return np.array(self.extent) / np.array(self.n)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.extent))

    @cached_property
    def axes(self) -> list[np.ndarray]:
        return [np.arange(n) * h for n, h in zip(self.n, self.spacing)]

    @cached_property
    def coords(self) -> np.ndarray:
        """Point coordinates, shape ``(3, nx, ny, nz)``."""
        return np.stack(np.meshgrid(*self.axes, indexing="ij"))

    def spacetime(self, t: float) -> np.ndarray:
        """``(x^0, x^1, x^2, x^3)`` at every point, shape ``(4, nx, ny, nz)``."""
        return np.concatenate([np.full((1, *self.n), float(t)), self.coords])

    def wavenumbers(self, axis: int) -> np.ndarray:
        n, L = self.n[axis], self.extent[axis]
        return 2 * np.pi * np.fft.fftfreq(n, d=L / n)

    def symbol(self, axis: int, derivative: str = "spectral") -> np.ndarray:
        """Real ``kappa`` with ``d/dx -> i kappa`` along ``axis`` (1-d array).

        The Nyquist mode is dropped for the spectral operator so that it stays
        anti-Hermitian.  ``central-4`` returns its modified wavenumber.
        """
        k = self.wavenumbers(axis)
        h = self.spacing[axis]
        if derivative == "spectral":
            n = self.n[axis]
            if n % 2 == 0:
                k = k.copy()
                k[n // 2] = 0.0
            return k
        if derivative == "central-4":
            return (8 * np.sin(k * h) - np.sin(2 * k * h)) / (6 * h)
        raise ValueError(f"unknown derivative {derivative!r}")

    def symbols(self, derivative: str = "spectral") -> list[np.ndarray]:
        """Broadcastable 3-d symbol arrays for the three axes."""
        out = []
        for ax in range(3):
            shape = [1, 1, 1]
            shape[ax] = self.n[ax]
            out.append(self.symbol(ax, derivative).reshape(shape))
        return out


def partial(arr: np.ndarray, axis: int, grid: Grid, derivative: str = "spectral") -> np.ndarray:
    """Derivative along spatial ``axis`` (0..2) of an array whose last three axes are spatial."""
    ax = arr.ndim - 3 + axis
    h = grid.spacing[axis]
    if derivative == "spectral":
        kappa = grid.symbol(axis, "spectral")
        shape = [1] * arr.ndim
        shape[ax] = kappa.size
        f = np.fft.fft(arr, axis=ax)
        out = np.fft.ifft(1j * kappa.reshape(shape) * f, axis=ax)
        return out.real if np.isrealobj(arr) else out
    if derivative == "central-4":
        r = lambda s: np.roll(arr, -s, axis=ax)  # noqa: E731 - f(x + s h)
        return (-r(2) + 8 * r(1) - 8 * r(-1) + r(-2)) / (12 * h)
    raise ValueError(f"unknown derivative {derivative!r}")


def gradient(arr: np.ndarray, grid: Grid, derivative: str = "spectral") -> list[np.ndarray]:
    return [partial(arr, k, grid, derivative) for k in range(3)]


@dataclass(frozen=True)
class SpinorField:
    grid: Grid
    data: Paravector
    t: float = 0.0

    def __post_init__(self):
        if self.data.batch_shape != self.grid.n:
            raise ValueError(f"data shape {self.data.batch_shape} does not match grid {self.grid.n}")
        if not np.all(np.isfinite(self.data.coeffs)):
            raise ValueError("non-finite spinor coefficients")

    def spatial_partials(self, derivative: str = "spectral") -> list[Paravector]:
        return apply_gradient(self, derivative)

    def with_data(self, data: Paravector, t: float | None = None) -> "SpinorField":
        return SpinorField(self.grid, data, self.t if t is None else t)


def apply_gradient(field: SpinorField, derivative: str = "spectral") -> list[Paravector]:
    """``[d_1 phi, d_2 phi, d_3 phi]`` at every grid point."""
    return [Paravector(d) for d in gradient(field.data.coeffs, field.grid, derivative)]


def integrate(values: np.ndarray, grid: Grid) -> float:
    return float(np.sum(values) * grid.cell_volume)


def norms(field: SpinorField, derivative: str = "spectral") -> dict[str, float]:
    """Discrete L2 and H1 norms with the pointwise Frobenius norm."""
    l2sq = integrate(frobenius_norm2(field.data), field.grid)
    gsq = sum(integrate(frobenius_norm2(d), field.grid) for d in apply_gradient(field, derivative))
    return {"l2": float(np.sqrt(l2sq)), "h1": float(np.sqrt(l2sq + gsq))}


def sample(grid: Grid, fn, t: float = 0.0) -> SpinorField:
    """Field from a callable mapping spacetime points ``(4, ...)`` to a Paravector."""
    return SpinorField(grid, fn(grid.spacetime(t)), t)


__all__ = ["Grid", "SpinorField", "partial", "gradient", "apply_gradient", "norms", "integrate", "sample", "field"]
