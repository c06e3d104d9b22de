"""
Pseudospectral time stepping of the (m, n) Cauchy problem

    m_t + 1/2 (uv - u_x v_x) m_x = -1/2 (u_x n + v_x m) m + 1/2 (u v_x - u_x v) m - b u_x
    n_t + 1/2 (uv - u_x v_x) n_x = -1/2 (u_x n + v_x m) n - 1/2 (u v_x - u_x v) n - b v_x

with u = (1 - d_xx)^{-1} m and v = (1 - d_xx)^{-1} n. Only (m, n) are
evolved; (u, v, u_x, v_x) are always rebuilt by Helmholtz inversion.
Time stepping is classical RK4 under an advective CFL limit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Literal

import numpy as np

from . import diagnostics, spectral
from .errors import ConfigurationError, NumericFailure

__all__ = [
    "State",
    "SolverConfig",
    "RunResult",
    "Snapshot",
    "make_state",
    "rhs",
    "cfl_dt",
    "step_rk4",
    "run",
]

logger = logging.getLogger(__name__)

FLOW_EPS = 1e-14

Termination = Literal["completed", "blowup_sup", "blowup_slope", "numeric_failure"]

# Auxiliary ODE co-stepped with the PDE: (stage_state, y) -> dy/dt.
AuxRhs = Callable[["State", np.ndarray], np.ndarray]


class State:
    """Momenta (m, n) at time t with lazily derived u, v, u_x, v_x.

    Instances are treated as immutable; the derived cache is built once on
    first access.
    """

    def __init__(self, grid: spectral.Grid1D, t: float, m, n):
        self.grid = grid
        self.t = float(t)
        self.m = spectral.check_field(grid, m, "m")
        self.n = spectral.check_field(grid, n, "n")
        self.m.setflags(write=False)
        self.n.setflags(write=False)

    @cached_property
    def m_hat(self) -> np.ndarray:
        return spectral.rfft(self.m)

    @cached_property
    def n_hat(self) -> np.ndarray:
        return spectral.rfft(self.n)

    @cached_property
    def _inv(self) -> np.ndarray:
        return 1.0 / (1.0 + self.grid.k**2)

    @cached_property
    def _ik(self) -> np.ndarray:
        return spectral._derivative_multiplier(self.grid)

    @cached_property
    def u_hat(self) -> np.ndarray:
        return self.m_hat * self._inv

    @cached_property
    def v_hat(self) -> np.ndarray:
        return self.n_hat * self._inv

    def _phys(self, fh: np.ndarray) -> np.ndarray:
        out = spectral.irfft(fh, self.grid.n_points)
        out.setflags(write=False)
        return out

    @cached_property
    def u(self) -> np.ndarray:
        return self._phys(self.u_hat)

    @cached_property
    def v(self) -> np.ndarray:
        return self._phys(self.v_hat)

    @cached_property
    def ux(self) -> np.ndarray:
        return self._phys(self.u_hat * self._ik)

    @cached_property
    def vx(self) -> np.ndarray:
        return self._phys(self.v_hat * self._ik)

    def swapped(self) -> "State":
        return State(self.grid, self.t, self.n, self.m)

    def spectra(self) -> np.ndarray:
        """Stacked rfft of (u, v, u_x, v_x, m, n), shape (6, N/2+1)."""
        ik = self._ik
        return np.stack(
            [self.u_hat, self.v_hat, self.u_hat * ik, self.v_hat * ik, self.m_hat, self.n_hat]
        )

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.m)) and np.all(np.isfinite(self.n)))


def make_state(grid: spectral.Grid1D, m, n, t: float = 0.0) -> State:
    return State(grid, t, m, n)


def state_from_velocities(grid: spectral.Grid1D, u, v, t: float = 0.0) -> State:
    """State whose momenta are helmholtz(u), helmholtz(v)."""
    return State(grid, t, spectral.helmholtz(grid, u), spectral.helmholtz(grid, v))


@dataclass(frozen=True)
class SolverConfig:
    b: float = 0.0
    cfl: float = 0.4
    dt_max: float = 1e-3
    t_end: float = 1.0
    dealias: bool = True
    blowup_sup_cap: float = 1e6
    blowup_slope_floor: float = -1e6
    snapshot_every: int = 0

    def __post_init__(self) -> None:
        if not (0.0 < self.cfl <= 1.0):
            raise ConfigurationError(f"cfl must lie in (0, 1], got {self.cfl}")
        if not self.dt_max > 0:
            raise ConfigurationError(f"dt_max must be positive, got {self.dt_max}")
        if not self.t_end > 0:
            raise ConfigurationError(f"t_end must be positive, got {self.t_end}")
        if not self.blowup_sup_cap > 0:
            raise ConfigurationError("blowup_sup_cap must be positive")
        if not self.blowup_slope_floor < 0:
            raise ConfigurationError("blowup_slope_floor must be negative")
        if self.snapshot_every < 0:
            raise ConfigurationError("snapshot_every must be >= 0")
        if not math.isfinite(self.b):
            raise ConfigurationError("b must be finite")


@dataclass(frozen=True)
class Snapshot:
    t: float
    m: np.ndarray
    n: np.ndarray
    u: np.ndarray
    v: np.ndarray


@dataclass
class RunResult:
    final_state: State
    termination: Termination
    records: list = field(default_factory=list)
    snapshots: list[Snapshot] = field(default_factory=list)
    steps: int = 0
    trajectories: object | None = None
    trajectory_log: list = field(default_factory=list)


def _rhs_arrays(s: State, b: float, dealias: bool) -> tuple[np.ndarray, np.ndarray]:
    g = s.grid
    npts = g.n_points
    ik = s._ik
    if dealias:
        mask = spectral.dealias_mask(g)

        def phys(fh):
            return spectral.irfft(fh * mask, npts)

        def trunc(f):
            return spectral.irfft(spectral.rfft(f) * mask, npts)

    else:

        def phys(fh):
            return spectral.irfft(fh, npts)

        def trunc(f):
            return f

    u, v = phys(s.u_hat), phys(s.v_hat)
    ux, vx = phys(s.u_hat * ik), phys(s.v_hat * ik)
    m, n = phys(s.m_hat), phys(s.n_hat)
    mx, nx = phys(s.m_hat * ik), phys(s.n_hat * ik)

    flow = trunc(u * v - ux * vx)
    slope = trunc(ux * n + vx * m)
    skew = trunc(u * vx - ux * v)

    dm = trunc(-0.5 * flow * mx - 0.5 * slope * m + 0.5 * skew * m)
    dn = trunc(-0.5 * flow * nx - 0.5 * slope * n - 0.5 * skew * n)
    if b != 0.0:
        dm = dm - b * s.ux
        dn = dn - b * s.vx
    return dm, dn


def rhs(s: State, b: float, dealias: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Time derivatives (dm/dt, dn/dt) of the state."""
    # Overflow is caught by the finiteness check below.
    with np.errstate(over="ignore", invalid="ignore"):
        dm, dn = _rhs_arrays(s, b, dealias)
    if not (np.all(np.isfinite(dm)) and np.all(np.isfinite(dn))):
        raise NumericFailure(f"non-finite right-hand side at t={s.t}")
    return dm, dn


def flow_field(s: State) -> np.ndarray:
    """Characteristic velocity 1/2 (uv - u_x v_x) at the nodes."""
    return 0.5 * (s.u * s.v - s.ux * s.vx)


def cfl_dt(s: State, cfg: SolverConfig) -> float:
    speed = float(np.max(np.abs(flow_field(s))))
    return min(cfg.dt_max, cfg.cfl * s.grid.spacing / max(FLOW_EPS, speed))


def step_rk4(
    s: State,
    dt: float,
    cfg: SolverConfig,
    aux: AuxRhs | None = None,
    y: np.ndarray | None = None,
):
    """One classical RK4 step.

    With ``aux`` and ``y`` given, the auxiliary ODE dy/dt = aux(state, y) is
    advanced with the same four stages, each evaluated against the matching
    PDE stage state, and ``(new_state, new_y)`` is returned.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    b, dealias = cfg.b, cfg.dealias
    g = s.grid
    half = 0.5 * dt

    k1m, k1n = rhs(s, b, dealias)
    s2 = State(g, s.t + half, s.m + half * k1m, s.n + half * k1n)
    k2m, k2n = rhs(s2, b, dealias)
    s3 = State(g, s.t + half, s.m + half * k2m, s.n + half * k2n)
    k3m, k3n = rhs(s3, b, dealias)
    s4 = State(g, s.t + dt, s.m + dt * k3m, s.n + dt * k3n)
    k4m, k4n = rhs(s4, b, dealias)

    m_new = s.m + (dt / 6.0) * (k1m + 2.0 * k2m + 2.0 * k3m + k4m)
    n_new = s.n + (dt / 6.0) * (k1n + 2.0 * k2n + 2.0 * k3n + k4n)
    if not (np.all(np.isfinite(m_new)) and np.all(np.isfinite(n_new))):
        raise NumericFailure(f"non-finite state after step at t={s.t + dt}")
    new = State(g, s.t + dt, m_new, n_new)
    if aux is None:
        return new

    a1 = aux(s, y)
    a2 = aux(s2, y + half * a1)
    a3 = aux(s3, y + half * a2)
    a4 = aux(s4, y + dt * a3)
    y_new = y + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    return new, y_new


def _snapshot(s: State) -> Snapshot:
    return Snapshot(s.t, s.m.copy(), s.n.copy(), np.array(s.u), np.array(s.v))


def run(
    grid: spectral.Grid1D,
    m0,
    n0,
    cfg: SolverConfig,
    trajectories=None,
    dt_fixed: float | None = None,
) -> RunResult:
    """Integrate from (m0, n0) at t = 0 up to ``cfg.t_end``.

    Stops early when max(|m|_inf, |n|_inf) exceeds the sup cap, when
    inf(u_x n + v_x m) drops below the slope floor, or on a non-finite
    state; the reason is reported in ``termination``. ``trajectories``
    (a :class:`~twocomp.characteristics.TrajectorySet`) are co-stepped with
    the solver when given. ``dt_fixed`` bypasses the CFL controller.
    """
    state = State(grid, 0.0, m0, n0)
    record = diagnostics.monitors(state, cfg.b)
    result = RunResult(final_state=state, termination="completed", records=[record])
    if cfg.snapshot_every:
        result.snapshots.append(_snapshot(state))
    if trajectories is not None:
        result.trajectory_log.append(trajectories.log_entry(state))

    t_end = cfg.t_end
    # Tolerance for landing exactly on t_end.
    t_tol = 1e-12 * max(1.0, t_end)
    step = 0
    while state.t < t_end - t_tol:
        dt = dt_fixed if dt_fixed is not None else cfl_dt(state, cfg)
        dt = min(dt, t_end - state.t)
        try:
            if trajectories is not None:
                new_state, trajectories = trajectories.co_step(state, dt, cfg)
            else:
                new_state = step_rk4(state, dt, cfg)
        except NumericFailure as exc:
            logger.warning("numeric failure: %s", exc)
            result.termination = "numeric_failure"
            break
        state = new_state
        step += 1
        record = diagnostics.monitors(state, cfg.b, previous=record)
        result.records.append(record)
        if trajectories is not None:
            result.trajectory_log.append(trajectories.log_entry(state))
        if cfg.snapshot_every and step % cfg.snapshot_every == 0:
            result.snapshots.append(_snapshot(state))
        if max(record.sup_m, record.sup_n) > cfg.blowup_sup_cap:
            result.termination = "blowup_sup"
            break
        if record.inf_slope < cfg.blowup_slope_floor:
            result.termination = "blowup_slope"
            break
        if trajectories is not None and trajectories.breakdown:
            logger.warning("characteristics crossed at t=%g", state.t)

    result.final_state = state
    result.steps = step
    result.trajectories = trajectories
    if cfg.snapshot_every and (not result.snapshots or result.snapshots[-1].t != state.t):
        result.snapshots.append(_snapshot(state))
    return result
