"""
Littlewood-Paley blocks and nonhomogeneous Besov / Sobolev norms.

The low-frequency cutoff is pinned to one explicit smooth quotient,

    chi(k) = g((4/3 - |k|) * 3) / (g((4/3 - |k|) * 3) + g((|k| - 1) * 3)),
    g(t)   = exp(-1/t) for t > 0, else 0,

so chi = 1 on |k| <= 1 and chi = 0 on |k| >= 4/3. The ring function is
phi(k) = chi(k/2) - chi(k). Blocks:

    Delta_{-1} f = chi(D) f,    Delta_q f = phi(2^{-q} D) f   (q >= 0),
    S_q f = chi(2^{-q} D) f.

The Besov norm is the l^r combination over q = -1..q_max of
2^{qs} |Delta_q f|_{L^p}.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .errors import ConfigurationError, OutOfBandError

__all__ = [
    "chi",
    "phi",
    "DyadicPartition",
    "BesovIndex",
    "BandTruncationWarning",
    "build_partition",
    "dyadic_block",
    "low_freq_cutoff",
    "block_norms",
    "besov_norm",
    "sobolev_norm",
]

PARTITION_TOL = 1e-12


class BandTruncationWarning(UserWarning):
    """Energy above the band covered by the dyadic partition."""


def _g(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def chi(k):
    """Smooth low-frequency cutoff: 1 on |k| <= 1, 0 on |k| >= 4/3."""
    a = np.abs(np.asarray(k, dtype=float))
    up = _g((4.0 / 3.0 - a) * 3.0)
    down = _g((a - 1.0) * 3.0)
    return up / (up + down)


def phi(k):
    """Ring function chi(k/2) - chi(k), supported in 3/4 <= |k| <= 8/3."""
    k = np.asarray(k, dtype=float)
    return chi(k / 2.0) - chi(k)


@dataclass(frozen=True)
class BesovIndex:
    s: float
    p: float = 2
    r: float = 2

    def __post_init__(self) -> None:
        if self.p not in (2, math.inf):
            raise ConfigurationError(f"p must be 2 or inf, got {self.p}")
        if self.r not in (1, 2, math.inf):
            raise ConfigurationError(f"r must be 1, 2 or inf, got {self.r}")
        if not math.isfinite(self.s):
            raise ConfigurationError("s must be finite")


@dataclass(frozen=True, eq=False)
class DyadicPartition:
    grid: spectral.Grid1D
    q_max: int
    chi_k: np.ndarray = field(repr=False)
    phi_per_q: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def covered_band(self) -> float:
        """Wavenumber bound below which the blocks reconstruct exactly.

        chi + sum_{q <= q_max} phi(2^{-q} k) telescopes to chi(2^{-q_max-1} k),
        which equals 1 for |k| <= 2^{q_max+1}.
        """
        return 2.0 ** (self.q_max + 1)

    def multiplier(self, q: int) -> np.ndarray:
        if q <= -2:
            return np.zeros_like(self.chi_k)
        if q == -1:
            return self.chi_k
        if q > self.q_max:
            raise OutOfBandError(f"block q={q} exceeds q_max={self.q_max}")
        return self.phi_per_q[q]


def build_partition(grid: spectral.Grid1D) -> DyadicPartition:
    q_max = math.floor(math.log2(grid.k_nyquist * 3.0 / 8.0)) if grid.k_nyquist > 0 else -1
    if q_max < 1:
        raise ConfigurationError(
            f"grid resolves only q_max={q_max}; need a finer grid or larger box"
        )
    k = grid.k
    chi_k = chi(k)
    rings = tuple(phi(k / 2.0**q) for q in range(q_max + 1))
    for arr in (chi_k, *rings):
        arr.setflags(write=False)
    part = DyadicPartition(grid=grid, q_max=q_max, chi_k=chi_k, phi_per_q=rings)
    covered = k <= part.covered_band
    total = chi_k + np.sum(rings, axis=0)
    err = float(np.max(np.abs(total[covered] - 1.0)))
    if err > PARTITION_TOL:
        raise ConfigurationError(f"partition of unity violated by {err:.3e}")
    return part


def _check_grid(f, part: DyadicPartition) -> np.ndarray:
    return spectral.check_field(part.grid, f)


def dyadic_block(f, q: int, part: DyadicPartition) -> np.ndarray:
    f = _check_grid(f, part)
    if q <= -2:
        return np.zeros_like(f)
    mult = part.multiplier(q)
    return spectral.irfft(spectral.rfft(f) * mult, part.grid.n_points)


def low_freq_cutoff(f, q: int, part: DyadicPartition) -> np.ndarray:
    """S_q f = chi(2^{-q} D) f for 0 <= q <= q_max + 1."""
    f = _check_grid(f, part)
    if q < 0 or q > part.q_max + 1:
        raise OutOfBandError(f"S_q needs 0 <= q <= {part.q_max + 1}, got {q}")
    mult = chi(part.grid.k / 2.0**q)
    return spectral.irfft(spectral.rfft(f) * mult, part.grid.n_points)


def _lp(f: np.ndarray, p: float, h: float) -> float:
    if p == 2:
        return float(math.sqrt(h * np.sum(f * f)))
    return float(np.max(np.abs(f)))


def _truncation_check(fh: np.ndarray, part: DyadicPartition) -> float:
    """Fraction of spectral energy above the covered band."""
    energy = np.abs(fh) ** 2
    total = float(np.sum(energy))
    if total == 0.0:
        return 0.0
    above = float(np.sum(energy[part.grid.k > part.covered_band]))
    return above / total


def block_norms(f, idx: BesovIndex, part: DyadicPartition) -> list[tuple[int, float]]:
    """[(q, 2^{qs} |Delta_q f|_{L^p}) for q = -1..q_max]."""
    f = _check_grid(f, part)
    fh = spectral.rfft(f)
    frac = _truncation_check(fh, part)
    if frac > 1e-14:
        warnings.warn(
            f"{frac:.3e} of the energy lies above the covered band |k| <= "
            f"{part.covered_band:g} (q_max={part.q_max})",
            BandTruncationWarning,
            stacklevel=2,
        )
    n, h = part.grid.n_points, part.grid.spacing
    out = []
    for q in range(-1, part.q_max + 1):
        block = spectral.irfft(fh * part.multiplier(q), n)
        out.append((q, 2.0 ** (q * idx.s) * _lp(block, idx.p, h)))
    return out


def besov_norm(f, idx: BesovIndex, part: DyadicPartition) -> float:
    """Nonhomogeneous B^s_{p,r} norm; warns when the band is truncated."""
    weighted = np.array([val for _, val in block_norms(f, idx, part)])
    if idx.r == 1:
        return float(np.sum(weighted))
    if idx.r == 2:
        return float(math.sqrt(np.sum(weighted * weighted)))
    return float(np.max(weighted))


def sobolev_norm(grid: spectral.Grid1D, f, s: float) -> float:
    """H^s norm from the Fourier multiplier (1 + k^2)^{s/2}."""
    f = spectral.check_field(grid, f)
    fh = spectral.rfft(f)
    weights = np.full(grid.n_points // 2 + 1, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0
    total = np.sum(weights * (1.0 + grid.k**2) ** s * np.abs(fh) ** 2)
    return float(math.sqrt(grid.length * total) / grid.n_points)
