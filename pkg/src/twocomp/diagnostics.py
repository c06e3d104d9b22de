"""
Conserved quantities, blow-up monitors and the blow-up time predictor.

Conserved (for every b):

    H1 = 1/2 int (u v + u_x v_x) dx = 1/2 int u n dx = 1/2 int v m dx
    H2 = 1/4 int ((u^2 v_x + u_x^2 v_x - 2 u u_x v) n + 2 b (u v_x - u_x v)) dx

Monitors tracked per time sample: |m|_inf, |n|_inf, inf(u_x n + v_x m),
|u v_x - u_x v|_inf and the running integral of |m|_inf |n|_inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from . import spectral
from .errors import HypothesisNotMetError, NumericFailure

if TYPE_CHECKING:
    from .evolve import State

__all__ = [
    "DiagnosticsRecord",
    "CSV_FIELDS",
    "h1",
    "h1_forms",
    "h2",
    "slope_field",
    "skew_field",
    "monitors",
    "slope_transport_rhs",
    "EtaProblem",
    "EtaResult",
    "eta_f",
    "eta_fprime",
    "solve_eta",
    "VerdictThresholds",
    "Verdict",
    "blowup_verdict",
]

CSV_FIELDS = ("t", "h1", "h2", "sup_m", "sup_n", "inf_slope", "sup_skew", "blowup_integral")


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    h1: float
    h2: float
    sup_m: float
    sup_n: float
    inf_slope: float
    sup_skew: float
    blowup_integral: float

    def as_row(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in CSV_FIELDS)


def h1(s: "State") -> float:
    return float(s.grid.spacing * np.sum(0.5 * (s.u * s.v + s.ux * s.vx)))


def h1_forms(s: "State") -> tuple[float, float, float]:
    """H1 evaluated as 1/2 int(uv + u_x v_x), 1/2 int(u n) and 1/2 int(v m)."""
    h = s.grid.spacing
    return (
        h1(s),
        float(0.5 * h * np.sum(s.u * s.n)),
        float(0.5 * h * np.sum(s.v * s.m)),
    )


def h2(s: "State", b: float) -> float:
    u, v, ux, vx = s.u, s.v, s.ux, s.vx
    integrand = (u * u * vx + ux * ux * vx - 2.0 * u * ux * v) * s.n + 2.0 * b * (
        u * vx - ux * v
    )
    return float(s.grid.spacing * np.sum(0.25 * integrand))


def slope_field(s: "State") -> np.ndarray:
    """M = u_x n + v_x m, the slope of the characteristic velocity (times 2)."""
    return s.ux * s.n + s.vx * s.m


def skew_field(s: "State") -> np.ndarray:
    return s.u * s.vx - s.ux * s.v


def monitors(
    s: "State", b: float = 0.0, previous: DiagnosticsRecord | None = None
) -> DiagnosticsRecord:
    """One diagnostics sample; the blow-up integral is advanced by a trapezoid
    from ``previous``."""
    sup_m = float(np.max(np.abs(s.m)))
    sup_n = float(np.max(np.abs(s.n)))
    integral = 0.0
    if previous is not None:
        dt = s.t - previous.t
        integral = previous.blowup_integral + 0.5 * dt * (
            previous.sup_m * previous.sup_n + sup_m * sup_n
        )
    return DiagnosticsRecord(
        t=s.t,
        h1=h1(s),
        h2=h2(s, b),
        sup_m=sup_m,
        sup_n=sup_n,
        inf_slope=float(np.min(slope_field(s))),
        sup_skew=float(np.max(np.abs(skew_field(s)))),
        blowup_integral=integral,
    )


def slope_transport_rhs(s: "State") -> np.ndarray:
    """Right-hand side of the transport equation satisfied by M (b = 0):

        M_t + 1/2 (uv - u_x v_x) M_x
          = -1/2 M^2 - 1/2 n G(u_x M) - 1/2 m G(v_x M)
            - 1/2 n dG(u M) - 1/2 m dG(v M) - 1/2 S (u_x n - v_x m)
            + 1/2 n dG(S m) - 1/2 m dG(S n)

    with G = (1 - d_xx)^{-1}, dG = d_x G and S = u v_x - u_x v.
    """
    g = s.grid
    M = slope_field(s)
    S = skew_field(s)
    m, n, u, v, ux, vx = s.m, s.n, s.u, s.v, s.ux, s.vx

    def G(f):
        return spectral.helmholtz_inverse(g, f)

    def dG(f):
        return spectral.derivative(g, spectral.helmholtz_inverse(g, f))

    return (
        -0.5 * M * M
        - 0.5 * n * G(ux * M)
        - 0.5 * m * G(vx * M)
        - 0.5 * n * dG(u * M)
        - 0.5 * m * dG(v * M)
        - 0.5 * S * (ux * n - vx * m)
        + 0.5 * n * dG(S * m)
        - 0.5 * m * dG(S * n)
    )


# --- blow-up time predictor ---------------------------------------------------


@dataclass(frozen=True)
class EtaProblem:
    """Inputs of the predictor: the growth constant C, M(0) and N(0)."""

    big_c: float
    m_of_0: float
    n_of_0: float

    def check(self) -> None:
        if not (self.big_c > 0 and math.isfinite(self.big_c)):
            raise HypothesisNotMetError(f"C must be positive, got {self.big_c}")
        if not (self.n_of_0 > 0 and math.isfinite(self.n_of_0)):
            raise HypothesisNotMetError(f"N(0) must be positive, got {self.n_of_0}")
        if not (self.m_of_0 < -2.0 * self.big_c):
            raise HypothesisNotMetError(
                f"hypothesis M(0) < -2C fails: M(0)={self.m_of_0}, -2C={-2.0 * self.big_c}"
            )


@dataclass(frozen=True)
class EtaResult:
    eta: float
    f_eta: float
    fprime_eta: float
    ratio_bound: float
    inequality_holds: bool
    iterations: int


def eta_f(p: EtaProblem, t: float) -> float:
    """f(t) = e^{e^{Ct}-1} (1/N0 + t/2) + 1/2 (M0/N0 - 1) t."""
    c, m0, n0 = p.big_c, p.m_of_0, p.n_of_0
    return math.exp(math.expm1(c * t)) * (1.0 / n0 + 0.5 * t) + 0.5 * (m0 / n0 - 1.0) * t


def eta_fprime(p: EtaProblem, t: float) -> float:
    c, m0, n0 = p.big_c, p.m_of_0, p.n_of_0
    ect = math.exp(c * t)
    return math.exp(math.expm1(c * t)) * (c / n0 * ect + 0.5 * c * t * ect + 0.5) + 0.5 * (
        m0 / n0 - 1.0
    )


def eta_fsecond(p: EtaProblem, t: float) -> float:
    c, n0 = p.big_c, p.n_of_0
    ect = math.exp(c * t)
    inner = c / n0 * ect + 0.5 * c * t * ect + 0.5
    return math.exp(math.expm1(c * t)) * (
        c * ect * inner + c * c * ect * (1.0 / n0 + 0.5 * t) + 0.5 * c * ect
    )


def solve_eta(p: EtaProblem, tol: float = 1e-10, max_doublings: int = 200) -> EtaResult:
    """Unique positive root of f'(t), by bracket doubling then bisection.

    f' is negative at 0 under the hypothesis and strictly increasing, so the
    root is bracketed by [0, hi] once f'(hi) > 0. Bisection continues until
    |f'(eta)| < ``tol`` or the bracket collapses to adjacent floats.
    """
    p.check()
    lo, hi = 0.0, 1.0
    doublings = 0
    while eta_fprime(p, hi) <= 0.0:
        lo, hi = hi, 2.0 * hi
        doublings += 1
        if doublings > max_doublings or not math.isfinite(eta_fprime(p, hi)):
            raise NumericFailure("no sign change of f' found while growing the bracket")
    it = 0
    mid = 0.5 * (lo + hi)
    while True:
        mid = 0.5 * (lo + hi)
        val = eta_fprime(p, mid)
        it += 1
        if abs(val) < tol or mid in (lo, hi):
            break
        if val < 0.0:
            lo = mid
        else:
            hi = mid
    eta = mid
    bound = -math.exp(math.expm1(p.big_c * eta)) * (2.0 / (eta * p.n_of_0) + 1.0) + 1.0
    return EtaResult(
        eta=eta,
        f_eta=eta_f(p, eta),
        fprime_eta=eta_fprime(p, eta),
        ratio_bound=bound,
        inequality_holds=p.m_of_0 / p.n_of_0 < bound,
        iterations=it,
    )


# --- verdicts -----------------------------------------------------------------


@dataclass(frozen=True)
class VerdictThresholds:
    sup_cap: float = 1e6
    slope_floor: float = -1e6
    skew_cap: float = 1e6
    growth_factor: float = 1e3


@dataclass
class Verdict:
    tripped: list[tuple[str, float]] = field(default_factory=list)
    details: list[str] = field(default_factory=list)

    @property
    def blowup(self) -> bool:
        return bool(self.tripped)

    @property
    def first(self) -> tuple[str, float] | None:
        return min(self.tripped, key=lambda item: item[1]) if self.tripped else None

    def summary(self) -> str:
        if not self.tripped:
            return "no blow-up indicators"
        parts = [f"{name} tripped at t={t:.17g}" for name, t in sorted(self.tripped, key=lambda x: x[1])]
        return "; ".join(parts)


def _first_time(ts: np.ndarray, mask: np.ndarray) -> float | None:
    idx = np.flatnonzero(mask)
    return float(ts[idx[0]]) if idx.size else None


def blowup_verdict(
    records: Sequence[DiagnosticsRecord], thresholds: VerdictThresholds | None = None
) -> Verdict:
    """Describe which blow-up monitors crossed their thresholds, and when.

    Purely descriptive: a monitor trips when it crosses its absolute
    threshold or grows by more than ``growth_factor`` relative to its
    first value (floored at 1).
    """
    if not records:
        raise ValueError("blowup_verdict needs at least one record")
    th = thresholds or VerdictThresholds()
    ts = np.array([r.t for r in records])
    verdict = Verdict()

    def trip(name: str, when: float | None, why: str) -> None:
        if when is not None:
            verdict.tripped.append((name, when))
            verdict.details.append(f"{name}: {why} at t={when:.17g}")

    for name in ("sup_m", "sup_n", "sup_skew"):
        vals = np.array([getattr(r, name) for r in records])
        cap = th.skew_cap if name == "sup_skew" else th.sup_cap
        ref = max(abs(vals[0]), 1.0)
        t_abs = _first_time(ts, vals > cap)
        t_rel = _first_time(ts, vals > th.growth_factor * ref)
        cands = [t for t in (t_abs, t_rel) if t is not None]
        trip(name, min(cands) if cands else None, f"exceeded {cap:g} or grew {th.growth_factor:g}x")

    slope = np.array([r.inf_slope for r in records])
    ref = max(abs(slope[0]), 1.0)
    t_abs = _first_time(ts, slope < th.slope_floor)
    t_rel = _first_time(ts, slope < -th.growth_factor * ref)
    cands = [t for t in (t_abs, t_rel) if t is not None]
    trip("inf_slope", min(cands) if cands else None, f"dropped below {th.slope_floor:g}")

    integ = np.array([r.blowup_integral for r in records])
    if len(records) >= 3:
        rate = np.diff(integ) / np.maximum(np.diff(ts), 1e-300)
        ref = max(abs(rate[0]), 1.0)
        t_rate = _first_time(ts[1:], rate > th.growth_factor * ref)
        trip("blowup_integral", t_rate, f"growth rate rose {th.growth_factor:g}x")
    return verdict
