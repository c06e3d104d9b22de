"""
Closed-form traveling waves of the two-component system.

Two families are provided, both functions of the moving coordinate
xi = x - c t:

    peakon   u = c1 e^{-|xi|},                v = c2 e^{-|xi|}
    kink     u = C1 sgn(xi) (e^{-|xi|} - 1),  v = C2 sgn(xi) (e^{-|xi|} - 1)

with the parameter relations c1 c2 = -3 c (peakon, b = 0) and
c = -b/2, C1 C2 = -b (kink). Each solution also carries the analytic
decomposition of its momenta m = u - u_xx, n = v - v_xx into an
absolutely continuous part plus a point mass at xi = 0; the weak-form
checker consumes that decomposition directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import spectral
from .errors import DomainViolationError, InvalidParameterError

__all__ = [
    "PeakonParams",
    "KinkParams",
    "ExactSolution",
    "make_peakon",
    "make_kink",
    "validate",
    "sample",
    "induced_momenta",
]

REL_TOL = 1e-12


def _close(a: float, b: float, tol: float = REL_TOL) -> bool:
    return abs(a - b) <= tol * max(abs(a), abs(b), 1e-300)


@dataclass(frozen=True)
class PeakonParams:
    c1: float
    c2: float
    c: float


@dataclass(frozen=True)
class KinkParams:
    big_c1: float
    big_c2: float
    b: float
    c: float


@dataclass(frozen=True)
class ExactSolution:
    kind: Literal["peakon", "kink"]
    params: PeakonParams | KinkParams

    @property
    def speed(self) -> float:
        return self.params.c

    @property
    def b(self) -> float:
        """The constant b this solution is posed with (0 for peakons)."""
        return self.params.b if self.kind == "kink" else 0.0

    @property
    def amplitudes(self) -> tuple[float, float]:
        p = self.params
        if self.kind == "peakon":
            return p.c1, p.c2
        return p.big_c1, p.big_c2

    def profile(self, xi):
        """Return (u, v, u_x, v_x) as functions of xi = x - ct.

        At xi = 0 the kink takes sgn(0) = 0, so u = v = 0 there; the
        peakon's slopes take the sgn(0) = 0 value as well.
        """
        xi = np.asarray(xi, dtype=float)
        e = np.exp(-np.abs(xi))
        a1, a2 = self.amplitudes
        s = np.sign(xi)
        if self.kind == "peakon":
            return a1 * e, a2 * e, -a1 * s * e, -a2 * s * e
        w = s * (e - 1.0)
        return a1 * w, a2 * w, -a1 * e, -a2 * e

    def one_sided(self, side: int) -> tuple[float, float, float, float]:
        """Limits of (u, v, u_x, v_x) as xi -> 0 from the left (-1) or right (+1)."""
        a1, a2 = self.amplitudes
        if self.kind == "peakon":
            return a1, a2, side * -a1, side * -a2
        return 0.0, 0.0, -a1, -a2

    def momentum_density(self, xi):
        """Absolutely continuous parts (m_ac, n_ac) of m and n away from xi = 0."""
        xi = np.asarray(xi, dtype=float)
        a1, a2 = self.amplitudes
        if self.kind == "peakon":
            z = np.zeros_like(xi)
            return z, z.copy()
        s = np.sign(xi)
        return -a1 * s, -a2 * s

    def point_masses(self) -> tuple[float, float]:
        """Weights of the Dirac masses of m and n at xi = 0.

        m = u - u_xx picks up minus the jump of u_x across the crest.
        """
        left = self.one_sided(-1)
        right = self.one_sided(+1)
        return left[2] - right[2], left[3] - right[3]


def validate(sol: ExactSolution) -> None:
    """Re-check the stored parameters against the family relations."""
    p = sol.params
    if sol.kind == "peakon":
        if not isinstance(p, PeakonParams):
            raise InvalidParameterError("peakon requires PeakonParams")
        if p.c == 0 or p.c1 == 0 or p.c2 == 0:
            raise InvalidParameterError("peakon parameters must be nonzero")
        if not _close(p.c1 * p.c2, -3.0 * p.c):
            raise InvalidParameterError(
                f"peakon relation c1*c2 = -3c violated: {p.c1 * p.c2} vs {-3 * p.c}"
            )
    elif sol.kind == "kink":
        if not isinstance(p, KinkParams):
            raise InvalidParameterError("kink requires KinkParams")
        if p.b == 0 or p.big_c1 == 0:
            raise InvalidParameterError("kink requires b != 0 and C1 != 0")
        if not _close(p.c, -0.5 * p.b):
            raise InvalidParameterError(f"kink relation c = -b/2 violated: c={p.c}, b={p.b}")
        if not _close(p.big_c1 * p.big_c2, -p.b):
            raise InvalidParameterError(
                f"kink relation C1*C2 = -b violated: {p.big_c1 * p.big_c2} vs {-p.b}"
            )
    else:
        raise InvalidParameterError(f"unknown family {sol.kind!r}")


def make_peakon(c1: float, c: float) -> ExactSolution:
    """Peakon with amplitude ``c1`` and speed ``c``; c2 = -3c/c1."""
    c1, c = float(c1), float(c)
    if c1 == 0 or c == 0 or not (math.isfinite(c1) and math.isfinite(c)):
        raise InvalidParameterError(f"peakon needs finite nonzero c1 and c, got {c1}, {c}")
    sol = ExactSolution("peakon", PeakonParams(c1=c1, c2=-3.0 * c / c1, c=c))
    validate(sol)
    return sol


def make_kink(b: float, big_c1: float) -> ExactSolution:
    """Weak kink for the constant ``b``; C2 = -b/C1 and c = -b/2."""
    b, big_c1 = float(b), float(big_c1)
    if b == 0 or big_c1 == 0 or not (math.isfinite(b) and math.isfinite(big_c1)):
        raise InvalidParameterError(f"kink needs finite nonzero b and C1, got {b}, {big_c1}")
    sol = ExactSolution(
        "kink", KinkParams(big_c1=big_c1, big_c2=-b / big_c1, b=b, c=-0.5 * b)
    )
    validate(sol)
    return sol


def _check_seam(sol: ExactSolution, grid: spectral.Grid1D, t: float, x0: float) -> None:
    if abs(x0 + sol.speed * t) >= grid.length / 4:
        raise DomainViolationError(
            f"wave centre {x0 + sol.speed * t:.6g} is within length/4 of the periodic seam"
        )


def sample(sol: ExactSolution, grid: spectral.Grid1D, t: float = 0.0, x0: float = 0.0):
    """Evaluate (u, v) at the grid nodes at time ``t``.

    ``x0`` shifts the wave centre at t = 0.
    """
    _check_seam(sol, grid, t, x0)
    u, v, _, _ = sol.profile(grid.x - x0 - sol.speed * t)
    return u, v


def induced_momenta(sol: ExactSolution, grid: spectral.Grid1D, t: float = 0.0, x0: float = 0.0):
    """m = helmholtz(u), n = helmholtz(v) for the sampled profile.

    For the peakon this is a grid-mollified point mass of weight 2 c1 at the
    crest; no distributional formula is sampled.
    """
    u, v = sample(sol, grid, t, x0)
    return spectral.helmholtz(grid, u), spectral.helmholtz(grid, v)
