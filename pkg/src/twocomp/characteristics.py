"""
Characteristics of the flow 1/2 (uv - u_x v_x) and their Lagrangian invariants.

Along q(t, x) with dq/dt = 1/2 (uv - u_x v_x)(t, q):

    q_x(t, x)      = exp(1/2 int_0^t (u_x n + v_x m)(s, q) ds)
    m(t, q) q_x    = m_0(x) exp( 1/2 int_0^t (u v_x - u_x v)(s, q) ds)
    n(t, q) q_x    = n_0(x) exp(-1/2 int_0^t (u v_x - u_x v)(s, q) ds)

the last two for b = 0. Positions and both exponents are integrated as one
ODE co-stepped with the PDE through the solver's RK4 stages; off-grid
values come from trigonometric interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import evolve, spectral

__all__ = [
    "TrajectorySet",
    "TrajectoryLogEntry",
    "seed",
    "flow_speed_at",
    "field_values_at",
    "advance",
    "jacobian",
    "seed_difference_jacobian",
    "lagrangian_invariants",
    "slope_minimum_seed",
    "insert_seed",
]


def field_values_at(s: "evolve.State", points) -> np.ndarray:
    """Interpolated (u, v, u_x, v_x, m, n) at ``points``; shape (6, P)."""
    return spectral.interpolate_spectrum(s.grid, s.spectra(), points)


def flow_speed_at(s: "evolve.State", x) -> np.ndarray | float:
    """1/2 (uv - u_x v_x) at arbitrary positions."""
    pts = np.atleast_1d(np.asarray(x, dtype=float))
    u, v, ux, vx, _, _ = field_values_at(s, pts)
    out = 0.5 * (u * v - ux * vx)
    return float(out[0]) if np.ndim(x) == 0 else out


@dataclass(frozen=True)
class TrajectoryLogEntry:
    t: float
    positions: np.ndarray
    log_jacobian: np.ndarray
    log_skew: np.ndarray
    slope: np.ndarray  # u_x n + v_x m along the trajectories
    mass: np.ndarray  # m + n along the trajectories


@dataclass(frozen=True)
class TrajectorySet:
    """Seeds x_i, positions q(t, x_i) and the two exponent accumulators.

    Positions are kept unwrapped so ordering is meaningful; use
    :meth:`wrapped` for positions folded back into the box.
    """

    seeds: np.ndarray
    positions: np.ndarray
    log_jacobian_accum: np.ndarray
    log_skew_accum: np.ndarray
    t: float = 0.0
    breakdown: bool = False
    breakdown_time: float | None = None

    def wrapped(self, grid: spectral.Grid1D) -> np.ndarray:
        half = grid.length / 2
        return (self.positions + half) % grid.length - half

    def is_ordered(self) -> bool:
        return bool(np.all(np.diff(self.positions) > 0))

    def _pack(self) -> np.ndarray:
        return np.concatenate([self.positions, self.log_jacobian_accum, self.log_skew_accum])

    def _unpack(self, y: np.ndarray, t: float) -> "TrajectorySet":
        p = len(self.seeds)
        new = replace(
            self,
            positions=y[:p].copy(),
            log_jacobian_accum=y[p : 2 * p].copy(),
            log_skew_accum=y[2 * p :].copy(),
            t=t,
        )
        if not self.breakdown and not new.is_ordered():
            new = replace(new, breakdown=True, breakdown_time=t)
        return new

    def co_step(self, s: "evolve.State", dt: float, cfg: "evolve.SolverConfig"):
        """Advance PDE state and trajectories together; returns (state, trajectories)."""
        new_state, y = evolve.step_rk4(s, dt, cfg, aux=_aux_rhs, y=self._pack())
        return new_state, self._unpack(y, new_state.t)

    def log_entry(self, s: "evolve.State") -> TrajectoryLogEntry:
        u, v, ux, vx, m, n = field_values_at(s, self.positions)
        return TrajectoryLogEntry(
            t=self.t,
            positions=self.positions.copy(),
            log_jacobian=self.log_jacobian_accum.copy(),
            log_skew=self.log_skew_accum.copy(),
            slope=ux * n + vx * m,
            mass=m + n,
        )


def seed(points, t: float = 0.0) -> TrajectorySet:
    pts = np.array(points, dtype=float)
    z = np.zeros_like(pts)
    return TrajectorySet(seeds=pts, positions=pts.copy(), log_jacobian_accum=z, log_skew_accum=z.copy(), t=t)


def _aux_rhs(s: "evolve.State", y: np.ndarray) -> np.ndarray:
    p = len(y) // 3
    u, v, ux, vx, m, n = field_values_at(s, y[:p])
    return np.concatenate(
        [0.5 * (u * v - ux * vx), 0.5 * (ux * n + vx * m), 0.5 * (u * vx - ux * v)]
    )


def advance(
    ts: TrajectorySet, s: "evolve.State", dt: float, cfg: "evolve.SolverConfig"
) -> tuple[TrajectorySet, "evolve.State"]:
    """One co-step of trajectories and solver from state ``s`` (at time ts.t)."""
    if abs(s.t - ts.t) > 1e-12 * max(1.0, abs(ts.t)):
        raise ValueError(f"state time {s.t} does not match trajectory time {ts.t}")
    new_state, new_ts = ts.co_step(s, dt, cfg)
    return new_ts, new_state


def jacobian(ts: TrajectorySet) -> np.ndarray:
    """q_x(t, x_i) in exponential form."""
    return np.exp(ts.log_jacobian_accum)


def seed_difference_jacobian(ts: TrajectorySet) -> np.ndarray:
    """Central differences of positions across neighbouring seeds (interior seeds)."""
    q, x = ts.positions, ts.seeds
    return (q[2:] - q[:-2]) / (x[2:] - x[:-2])


def lagrangian_invariants(
    ts: TrajectorySet, s0: "evolve.State", s: "evolve.State"
) -> tuple[np.ndarray, np.ndarray]:
    """Residuals m(t,q) q_x - m_0(x) e^{K} and n(t,q) q_x - n_0(x) e^{-K}."""
    qx = jacobian(ts)
    vals = field_values_at(s, ts.positions)
    m0 = spectral.interpolate_spectrum(s0.grid, s0.m_hat, ts.seeds)
    n0 = spectral.interpolate_spectrum(s0.grid, s0.n_hat, ts.seeds)
    k = ts.log_skew_accum
    return vals[4] * qx - m0 * np.exp(k), vals[5] * qx - n0 * np.exp(-k)


def slope_minimum_seed(s: "evolve.State") -> float:
    """Node where u_x n + v_x m attains its grid minimum."""
    slope = s.ux * s.n + s.vx * s.m
    return float(s.grid.x[int(np.argmin(slope))])


def insert_seed(seeds, x: float) -> tuple[np.ndarray, int]:
    """Sorted seeds with ``x`` added (if absent); returns (seeds, index of x)."""
    pts = np.unique(np.append(np.asarray(seeds, dtype=float), x))
    return pts, int(np.searchsorted(pts, x))
