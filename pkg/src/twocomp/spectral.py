"""
Periodic Fourier substrate.

The real line is truncated to the periodic box [-L/2, L/2) sampled at N
equispaced nodes. All operators are diagonal Fourier multipliers applied
through real FFTs:

    derivative            i k
    helmholtz             1 + k^2
    helmholtz_inverse     1 / (1 + k^2)     (periodized kernel e^{-|x|}/2)

Fields are plain float64 arrays with one entry per node; the grid travels
alongside them.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError, UsageError

__all__ = [
    "Grid1D",
    "make_grid",
    "fft_workers",
    "check_field",
    "derivative",
    "helmholtz",
    "helmholtz_inverse",
    "dealias_mask",
    "truncate",
    "dealiased_product",
    "spectral_energy",
    "interpolate",
]


def fft_workers() -> int:
    """Worker count for scipy.fft, capped by ``TWOCOMP_THREADS``."""
    raw = os.environ.get("TWOCOMP_THREADS")
    if raw is None:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def rfft(f: np.ndarray) -> np.ndarray:
    return sfft.rfft(f, workers=fft_workers())


def irfft(fh: np.ndarray, n: int) -> np.ndarray:
    return sfft.irfft(fh, n=n, workers=fft_workers())


@dataclass(frozen=True, eq=False)
class Grid1D:
    """Uniform periodic grid on [-length/2, length/2).

    ``k`` holds the non-negative wavenumbers of the rfft layout;
    ``wavenumbers`` is the full signed table in standard FFT ordering.
    """

    n_points: int
    length: float
    spacing: float = field(init=False)
    x: np.ndarray = field(init=False, repr=False)
    k: np.ndarray = field(init=False, repr=False)
    wavenumbers: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        n = self.n_points
        if not isinstance(n, (int, np.integer)) or n < 8 or n & (n - 1):
            raise ConfigurationError(
                f"n_points must be a power of two >= 8, got {n!r}"
            )
        if not np.isfinite(self.length) or self.length <= 0:
            raise ConfigurationError(f"length must be positive, got {self.length!r}")
        h = self.length / n
        object.__setattr__(self, "n_points", int(n))
        object.__setattr__(self, "length", float(self.length))
        object.__setattr__(self, "spacing", h)
        x = -self.length / 2 + h * np.arange(n)
        k = 2 * np.pi * np.arange(n // 2 + 1) / self.length
        signed = 2 * np.pi * sfft.fftfreq(n, d=1.0 / n) / self.length
        for arr in (x, k, signed):
            arr.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "wavenumbers", signed)

    @property
    def k_nyquist(self) -> float:
        return float(self.k[-1])

    def same_as(self, other: "Grid1D") -> bool:
        return self is other or (
            self.n_points == other.n_points and self.length == other.length
        )

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Grid1D) and self.same_as(other)

    def __hash__(self) -> int:
        return hash((self.n_points, self.length))


def make_grid(n_points: int, length: float) -> Grid1D:
    return Grid1D(n_points, length)


def check_field(grid: Grid1D, f, name: str = "field") -> np.ndarray:
    """Validate and return ``f`` as a float64 array living on ``grid``."""
    arr = np.asarray(f, dtype=float)
    if arr.shape != (grid.n_points,):
        raise UsageError(
            f"{name} has shape {arr.shape}, expected ({grid.n_points},)"
        )
    if not np.all(np.isfinite(arr)):
        raise UsageError(f"{name} contains non-finite values")
    return arr


def _apply(grid: Grid1D, f: np.ndarray, multiplier: np.ndarray) -> np.ndarray:
    return irfft(rfft(f) * multiplier, grid.n_points)


def _derivative_multiplier(grid: Grid1D) -> np.ndarray:
    mult = 1j * grid.k
    mult[-1] = 0.0  # Nyquist
    return mult


def derivative(grid: Grid1D, f) -> np.ndarray:
    """Spectral x-derivative; the Nyquist coefficient is dropped."""
    f = check_field(grid, f)
    return _apply(grid, f, _derivative_multiplier(grid))


def helmholtz(grid: Grid1D, f) -> np.ndarray:
    """Apply 1 - d^2/dx^2."""
    f = check_field(grid, f)
    return _apply(grid, f, 1.0 + grid.k**2)


def helmholtz_inverse(grid: Grid1D, f) -> np.ndarray:
    """Apply (1 - d^2/dx^2)^{-1}, i.e. periodic convolution with e^{-|x|}/2."""
    f = check_field(grid, f)
    return _apply(grid, f, 1.0 / (1.0 + grid.k**2))


def dealias_mask(grid: Grid1D) -> np.ndarray:
    """Boolean rfft mask keeping modes |j| <= n_points/3."""
    j = np.arange(grid.n_points // 2 + 1)
    return j <= grid.n_points // 3


def truncate(grid: Grid1D, f: np.ndarray) -> np.ndarray:
    """Zero every mode above the 2/3 cutoff."""
    return irfft(rfft(f) * dealias_mask(grid), grid.n_points)


def dealiased_product(grid: Grid1D, f, g) -> np.ndarray:
    """Pointwise product under the 2/3 rule.

    Both factors are truncated to |j| <= N/3 before multiplying and the
    product is truncated again. Operands sampled on a different grid are
    rejected with :class:`UsageError`.
    """
    f = check_field(grid, f, "f")
    g = check_field(grid, g, "g")
    return truncate(grid, truncate(grid, f) * truncate(grid, g))


def spectral_energy(grid: Grid1D, f) -> float:
    """L^2 energy computed from Fourier coefficients (Parseval)."""
    f = check_field(grid, f)
    fh = sfft.fft(f)
    return float(grid.length * np.sum(np.abs(fh) ** 2) / grid.n_points**2)


def interpolate(grid: Grid1D, f, points) -> np.ndarray:
    """Trigonometric interpolant of ``f`` evaluated at arbitrary points.

    Reproduces nodal values exactly; the Nyquist term is carried as a cosine
    so the interpolant of a real field stays real.
    """
    f = check_field(grid, f)
    return interpolate_spectrum(grid, rfft(f), points)


def _phases(grid: Grid1D, offsets: np.ndarray) -> np.ndarray:
    """exp(i k_j s) for every offset s and rfft mode j, shape (P, N/2+1).

    The mode index is split as j = a*B + b so only O(P sqrt(N)) complex
    exponentials are evaluated.
    """
    nk = grid.n_points // 2 + 1
    block = int(np.ceil(np.sqrt(nk)))
    nblocks = -(-nk // block)
    dk = 2 * np.pi / grid.length
    lo = np.exp(1j * dk * np.outer(offsets, np.arange(block)))
    hi = np.exp(1j * dk * block * np.outer(offsets, np.arange(nblocks)))
    return (hi[:, :, None] * lo[:, None, :]).reshape(len(offsets), -1)[:, :nk]


def interpolate_spectrum(grid: Grid1D, fh: np.ndarray, points) -> np.ndarray:
    """Same as :func:`interpolate` for a precomputed rfft (shape (..., N/2+1))."""
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    n = grid.n_points
    weights = np.full(n // 2 + 1, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0
    offsets = pts - grid.x[0]
    phase = _phases(grid, offsets)
    coeffs = np.atleast_2d(np.asarray(fh) * weights / n)
    # Nyquist: cos(k_N s) is real, its sine partner vanishes at the nodes.
    vals = (phase[:, :-1].real @ coeffs[:, :-1].real.T) - (
        phase[:, :-1].imag @ coeffs[:, :-1].imag.T
    )
    vals += np.cos(grid.k[-1] * offsets)[:, None] * coeffs[:, -1].real[None, :]
    if np.ndim(fh) == 1:
        return vals[:, 0]
    return vals.T
