"""
Command-line front end.

    twocomp evolve --config run.cfg [--output-dir out/]
    twocomp verify-exact --config exact.cfg
    twocomp eta C M0 N0
    twocomp besov-norm snap_3.txt --s 1.4 --p 2 --r 2

Configuration is flat ``key=value`` text, one pair per line, ``#`` starts a
comment. Every exit path writes ``reason=<token>`` to standard error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import besov, characteristics, diagnostics, evolve, exact, spectral, weakcheck
from .errors import ConfigurationError, HypothesisNotMetError, TwoCompError

__all__ = [
    "RunConfig",
    "ConfigError",
    "parse_config",
    "initial_state",
    "cmd_evolve",
    "cmd_verify_exact",
    "cmd_eta",
    "cmd_besov_norm",
    "main",
]

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_BLOWUP = 2
EXIT_HYPOTHESIS = 3


class ConfigError(ConfigurationError):
    """Configuration problem tied to a key and, when known, a line number."""

    def __init__(self, key: str, message: str, line: int | None = None):
        self.key = key
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{key}: {message}")


# --- configuration ------------------------------------------------------------


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("on", "true", "yes", "1"):
        return True
    if low in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"expected on/off, got {text!r}")


def _parse_float(text: str) -> float:
    val = float(text)
    if math.isnan(val):
        raise ValueError("NaN is not allowed")
    return val


def _parse_besov_list(text: str) -> tuple[besov.BesovIndex, ...]:
    """``s:p:r`` triples separated by commas, e.g. ``1.4:2:2,1.6:inf:inf``."""
    out = []
    for item in filter(None, (t.strip() for t in text.split(","))):
        parts = item.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected s:p:r, got {item!r}")
        s, p, r = (_parse_float(x) for x in parts)
        out.append(besov.BesovIndex(s=s, p=p, r=r))
    return tuple(out)


# key -> parser; the value type doubles as documentation of the format.
KEYS: dict[str, Callable[[str], object]] = {
    "grid.n_points": int,
    "grid.length": _parse_float,
    "physics.b": _parse_float,
    "initial.kind": str.strip,
    "initial.c1": _parse_float,
    "initial.c2": _parse_float,
    "initial.c": _parse_float,
    "initial.big_c1": _parse_float,
    "initial.big_c2": _parse_float,
    "initial.x0": _parse_float,
    "initial.u_amp": _parse_float,
    "initial.u_center": _parse_float,
    "initial.u_width": _parse_float,
    "initial.v_amp": _parse_float,
    "initial.v_center": _parse_float,
    "initial.v_width": _parse_float,
    "initial.path": str.strip,
    "solver.cfl": _parse_float,
    "solver.dt_max": _parse_float,
    "solver.t_end": _parse_float,
    "solver.dealias": _parse_bool,
    "solver.sup_cap": _parse_float,
    "solver.slope_floor": _parse_float,
    "outputs.directory": str.strip,
    "outputs.snapshot_every": int,
    "outputs.besov_indices": _parse_besov_list,
    "outputs.characteristics.enabled": _parse_bool,
    "outputs.characteristics.seed_count": int,
    "outputs.characteristics.seed_min": _parse_float,
    "outputs.characteristics.seed_max": _parse_float,
    "verify.free": str.strip,
    "verify.threshold": _parse_float,
    "verify.convention": str.strip,
    "verify.scan_min": _parse_float,
    "verify.scan_max": _parse_float,
}

INITIAL_KEYS = {
    "peakon": {"c1", "c2", "c", "x0"},
    "kink": {"big_c1", "big_c2", "c", "x0"},
    "gaussian": {"u_amp", "u_center", "u_width", "v_amp", "v_center", "v_width"},
    "file": {"path"},
}


@dataclass(frozen=True)
class CharacteristicsOutput:
    enabled: bool = False
    seed_count: int = 64
    seed_min: float | None = None
    seed_max: float | None = None


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "."
    snapshot_every: int = 0
    besov_indices: tuple[besov.BesovIndex, ...] = ()
    characteristics: CharacteristicsOutput = CharacteristicsOutput()


@dataclass(frozen=True)
class VerifyConfig:
    free: tuple[str, ...] = ("c",)
    threshold: float = 1e-8
    convention: str = "path_average"
    scan: tuple[float, float] = (-5.0, 5.0)


@dataclass(frozen=True)
class RunConfig:
    grid: spectral.Grid1D
    b: float
    kind: str
    initial: dict[str, float | str]
    solver: evolve.SolverConfig
    outputs: OutputConfig = OutputConfig()
    verify: VerifyConfig = VerifyConfig()
    lines: dict[str, int] = field(default_factory=dict, repr=False, compare=False)


def _read_pairs(text: str) -> tuple[dict[str, object], dict[str, int]]:
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line, "expected key=value", lineno)
        key, _, val = (part.strip() for part in line.partition("="))
        if key not in KEYS:
            raise ConfigError(key, "unknown key", lineno)
        if key in values:
            raise ConfigError(key, f"duplicate key (first set on line {lines[key]})", lineno)
        try:
            values[key] = KEYS[key](val)
        except (ValueError, ConfigurationError) as exc:
            raise ConfigError(key, f"cannot parse {val!r}: {exc}", lineno) from None
        lines[key] = lineno
    return values, lines


def parse_config(text: str) -> RunConfig:
    """Parse and validate flat ``key=value`` configuration text."""
    values, lines = _read_pairs(text)

    def fail(key: str, message: str):
        raise ConfigError(key, message, lines.get(key))

    def get(key: str, default=None):
        return values.get(key, default)

    kind = get("initial.kind")
    if kind is None:
        raise ConfigError("initial.kind", "initial.kind required")
    if kind not in INITIAL_KEYS:
        fail("initial.kind", f"must be one of {sorted(INITIAL_KEYS)}, got {kind!r}")
    for key in values:
        if key.startswith("initial.") and key != "initial.kind":
            if key.split(".", 1)[1] not in INITIAL_KEYS[kind]:
                fail(key, f"not a parameter of initial.kind={kind}")

    try:
        grid = spectral.make_grid(get("grid.n_points", 1024), get("grid.length", 40.0))
    except ConfigurationError as exc:
        key = "grid.n_points" if "n_points" in str(exc) else "grid.length"
        fail(key, str(exc))

    b = get("physics.b", 0.0)
    if not math.isfinite(b):
        fail("physics.b", "must be finite")

    solver_keys = {
        "cfl": "solver.cfl",
        "dt_max": "solver.dt_max",
        "t_end": "solver.t_end",
        "dealias": "solver.dealias",
        "blowup_sup_cap": "solver.sup_cap",
        "blowup_slope_floor": "solver.slope_floor",
    }
    kwargs = {name: values[key] for name, key in solver_keys.items() if key in values}
    cfl = kwargs.get("cfl", 0.4)
    if not 0.0 < cfl <= 1.0:
        fail("solver.cfl", f"cfl out of (0,1]: {cfl}")
    snap_every = get("outputs.snapshot_every", 0)
    try:
        solver = evolve.SolverConfig(b=b, snapshot_every=snap_every, **kwargs)
    except ConfigurationError as exc:
        # SolverConfig messages start with the offending field name.
        name = str(exc).split()[0]
        fail(solver_keys.get(name, "outputs.snapshot_every" if name == "snapshot_every" else "physics.b"), str(exc))

    initial = {k.split(".", 1)[1]: v for k, v in values.items() if k.startswith("initial.")}
    initial.pop("kind")
    _check_initial(kind, initial, b, fail)

    seed_count = get("outputs.characteristics.seed_count", 64)
    if seed_count < 3:
        fail("outputs.characteristics.seed_count", "need at least 3 seeds")
    chars = CharacteristicsOutput(
        enabled=get("outputs.characteristics.enabled", False),
        seed_count=seed_count,
        seed_min=get("outputs.characteristics.seed_min"),
        seed_max=get("outputs.characteristics.seed_max"),
    )
    lo = chars.seed_min if chars.seed_min is not None else -grid.length / 4
    hi = chars.seed_max if chars.seed_max is not None else grid.length / 4
    if not lo < hi:
        fail("outputs.characteristics.seed_max", "seed_max must exceed seed_min")
    outputs = OutputConfig(
        directory=get("outputs.directory", "."),
        snapshot_every=snap_every,
        besov_indices=get("outputs.besov_indices", ()),
        characteristics=chars,
    )

    free = tuple(x.strip() for x in get("verify.free", "c").split(",") if x.strip())
    names = weakcheck.PEAKON_NAMES if kind == "peakon" else weakcheck.KINK_NAMES
    if kind in ("peakon", "kink"):
        bad = [x for x in free if x not in names]
        if bad or not 1 <= len(free) <= 2:
            fail("verify.free", f"one or two of {names} expected, got {','.join(free)}")
    convention = get("verify.convention", "path_average")
    if convention not in ("path_average", "half_value"):
        fail("verify.convention", f"must be path_average or half_value, got {convention!r}")
    threshold = get("verify.threshold", 1e-8)
    if not threshold > 0:
        fail("verify.threshold", "must be positive")
    scan = (get("verify.scan_min", -5.0), get("verify.scan_max", 5.0))
    if not scan[0] < scan[1]:
        fail("verify.scan_max", "scan_max must exceed scan_min")
    verify = VerifyConfig(free=free, threshold=threshold, convention=convention, scan=scan)

    return RunConfig(
        grid=grid,
        b=b,
        kind=kind,
        initial=initial,
        solver=solver,
        outputs=outputs,
        verify=verify,
        lines=lines,
    )


def _check_initial(kind: str, p: dict, b: float, fail) -> None:
    if kind == "peakon":
        for name in ("c1", "c"):
            if name not in p:
                fail(f"initial.{name}", f"initial.{name} required for a peakon")
            if p[name] == 0 or not math.isfinite(p[name]):
                fail(f"initial.{name}", "must be finite and nonzero")
        if b != 0.0:
            fail("physics.b", "the peakon is posed with b = 0")
        # c2 follows from c1 and c unless given explicitly.
        p.setdefault("c2", -3.0 * p["c"] / p["c1"])
    elif kind == "kink":
        if "big_c1" not in p:
            fail("initial.big_c1", "initial.big_c1 required for a kink")
        if p["big_c1"] == 0 or not math.isfinite(p["big_c1"]):
            fail("initial.big_c1", "must be finite and nonzero")
        if b == 0.0:
            fail("physics.b", "the kink needs b != 0")
        p.setdefault("big_c2", -b / p["big_c1"])
        p.setdefault("c", -0.5 * b)
    elif kind == "gaussian":
        for comp in ("u", "v"):
            p.setdefault(f"{comp}_amp", 1.0)
            p.setdefault(f"{comp}_center", 0.0)
            p.setdefault(f"{comp}_width", 1.0)
            if not p[f"{comp}_width"] > 0:
                fail(f"initial.{comp}_width", "must be positive")
    elif kind == "file":
        if "path" not in p:
            fail("initial.path", "initial.path required for file data")


def _exact_from_config(cfg: RunConfig) -> exact.ExactSolution:
    vals = dict(cfg.initial)
    vals.pop("x0", None)
    if cfg.kind == "kink":
        vals["b"] = cfg.b
    return weakcheck.build_solution(cfg.kind, vals)


def read_snapshot(path: str | Path) -> tuple[float | None, np.ndarray]:
    """Load a snapshot file; returns (t, columns) with columns shaped (5, N)."""
    t = None
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("t="):
                    t = float(body[2:])
                continue
            parts = line.split()
            if len(parts) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 columns (x m n u v), got {len(parts)}")
            rows.append([float(x) for x in parts])
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.array(rows).T
    if not np.all(np.isfinite(data)):
        raise ValueError(f"{path}: non-finite values")
    return t, data


def grid_from_nodes(x: np.ndarray) -> spectral.Grid1D:
    """Recover the grid from node positions x_i = -L/2 + i h."""
    n = len(x)
    if n < 2:
        raise ValueError("need at least two nodes")
    h = (x[-1] - x[0]) / (n - 1)
    if not h > 0 or np.max(np.abs(np.diff(x) - h)) > 1e-9 * max(1.0, abs(h) * n):
        raise ValueError("node positions are not uniformly spaced")
    grid = spectral.make_grid(n, n * h)
    if np.max(np.abs(grid.x - x)) > 1e-8 * grid.length:
        raise ValueError("nodes do not start at -length/2")
    return grid


def initial_state(cfg: RunConfig) -> evolve.State:
    g, p = cfg.grid, cfg.initial
    if cfg.kind in ("peakon", "kink"):
        sol = _exact_from_config(cfg)
        u, v = exact.sample(sol, g, 0.0, p.get("x0", 0.0))
        return evolve.state_from_velocities(g, u, v)
    if cfg.kind == "gaussian":

        def bump(comp):
            z = (g.x - p[f"{comp}_center"]) / p[f"{comp}_width"]
            return p[f"{comp}_amp"] * np.exp(-z * z)

        return evolve.state_from_velocities(g, bump("u"), bump("v"))
    _, data = read_snapshot(p["path"])
    if data.shape[1] != g.n_points:
        raise ConfigError(
            "initial.path", f"file has {data.shape[1]} nodes, grid has {g.n_points}",
            cfg.lines.get("initial.path"),
        )
    return evolve.make_state(g, data[1], data[2])


# --- output helpers -------------------------------------------------------------


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _reason(token: str) -> None:
    print(f"reason={token}", file=sys.stderr)


def write_diagnostics(path: Path, records: Sequence[diagnostics.DiagnosticsRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(diagnostics.CSV_FIELDS)
        for rec in records:
            w.writerow([fmt(v) for v in rec.as_row()])


def write_snapshot(path: Path, grid: spectral.Grid1D, snap: evolve.Snapshot) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# t={fmt(snap.t)}\n")
        for row in zip(grid.x, snap.m, snap.n, snap.u, snap.v):
            fh.write(" ".join(fmt(v) for v in row) + "\n")


def write_characteristics(path: Path, log: Sequence[characteristics.TrajectoryLogEntry], seeds) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("t", "seed", "q", "log_jacobian", "log_skew"))
        for entry in log:
            for x, q, lj, ls in zip(seeds, entry.positions, entry.log_jacobian, entry.log_skew):
                w.writerow([fmt(entry.t), fmt(x), fmt(q), fmt(lj), fmt(ls)])


def write_slope_tracking(path: Path, result: evolve.RunResult, index: int) -> None:
    """Global infimum of u_x n + v_x m next to its value along one characteristic."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("t", "seed", "q", "inf_slope", "slope_along_q"))
        for rec, entry in zip(result.records, result.trajectory_log):
            w.writerow([fmt(rec.t), fmt(result.trajectories.seeds[index]), fmt(entry.positions[index]),
                        fmt(rec.inf_slope), fmt(entry.slope[index])])


def write_besov(path: Path, grid: spectral.Grid1D, snaps, indices) -> None:
    part = besov.build_partition(grid)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("t", "field", "s", "p", "r", "norm"))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", besov.BandTruncationWarning)
            for snap in snaps:
                for name in ("u", "v"):
                    f = getattr(snap, name)
                    for idx in indices:
                        w.writerow([fmt(snap.t), name, fmt(idx.s), fmt(idx.p), fmt(idx.r),
                                    fmt(besov.besov_norm(f, idx, part))])
        if caught:
            logger.warning("besov tracking: %s", caught[0].message)


# --- subcommands ----------------------------------------------------------------


def cmd_evolve(cfg: RunConfig, output_dir: str | Path | None = None) -> int:
    out = Path(output_dir if output_dir is not None else cfg.outputs.directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
        s0 = initial_state(cfg)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        _reason("io_error")
        return EXIT_FAILURE
    except (ValueError, TwoCompError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        _reason("bad_initial_data")
        return EXIT_FAILURE

    chars = cfg.outputs.characteristics
    trajectories = None
    solver = cfg.solver
    if cfg.outputs.besov_indices and not solver.snapshot_every:
        logger.info("besov tracking without snapshots uses the initial and final states only")
    if chars.enabled:
        lo = chars.seed_min if chars.seed_min is not None else -cfg.grid.length / 4
        hi = chars.seed_max if chars.seed_max is not None else cfg.grid.length / 4
        # The seed at the initial minimum of u_x n + v_x m is always included so
        # the slope along that characteristic can be compared with the grid infimum.
        seeds, tracked = characteristics.insert_seed(
            np.linspace(lo, hi, chars.seed_count), characteristics.slope_minimum_seed(s0)
        )
        trajectories = characteristics.seed(seeds)
    result = evolve.run(cfg.grid, s0.m, s0.n, solver, trajectories=trajectories)

    verdict = diagnostics.blowup_verdict(
        result.records,
        diagnostics.VerdictThresholds(sup_cap=solver.blowup_sup_cap, slope_floor=solver.blowup_slope_floor),
    )
    try:
        write_diagnostics(out / "diagnostics.csv", result.records)
        for i, snap in enumerate(result.snapshots):
            write_snapshot(out / f"snap_{i}.txt", cfg.grid, snap)
        if trajectories is not None:
            write_characteristics(out / "characteristics.csv", result.trajectory_log, trajectories.seeds)
            write_slope_tracking(out / "slope_tracking.csv", result, tracked)
        if cfg.outputs.besov_indices:
            snaps = result.snapshots or [
                evolve._snapshot(s0),
                evolve._snapshot(result.final_state),
            ]
            write_besov(out / "besov.csv", cfg.grid, snaps, cfg.outputs.besov_indices)
        with open(out / "verdict.txt", "w", encoding="utf-8") as fh:
            fh.write(f"termination={result.termination}\n")
            fh.write(f"t_final={fmt(result.final_state.t)}\n")
            fh.write(f"steps={result.steps}\n")
            fh.write(f"monitors={verdict.summary()}\n")
            for line in verdict.details:
                fh.write(f"detail={line}\n")
            if result.trajectories is not None and result.trajectories.breakdown:
                fh.write(f"characteristics_crossed_at={fmt(result.trajectories.breakdown_time)}\n")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        _reason("io_error")
        return EXIT_FAILURE

    print(f"termination={result.termination} t={fmt(result.final_state.t)} steps={result.steps}")
    print(verdict.summary())
    _reason(result.termination)
    if result.termination == "completed":
        return EXIT_OK
    if result.termination in ("blowup_sup", "blowup_slope"):
        return EXIT_BLOWUP
    return EXIT_FAILURE


def cmd_verify_exact(cfg: RunConfig) -> int:
    if cfg.kind not in ("peakon", "kink"):
        print(f"error: verify-exact needs a peakon or kink, got {cfg.kind}", file=sys.stderr)
        _reason("config_error")
        return EXIT_FAILURE
    sol = _exact_from_config(cfg)
    tfs = weakcheck.default_test_functions()
    conv = cfg.verify.convention
    print(f"family={sol.kind} " + " ".join(f"{k}={fmt(v)}" for k, v in vars(sol.params).items()))
    print(f"convention={conv} threshold={fmt(cfg.verify.threshold)}")
    print("tf t0 x0 width_t width_x r_m r_n scale_m scale_n relative")
    worst = 0.0
    for i, tf in enumerate(tfs):
        r = weakcheck.distributional_residual(sol, tf, sol.b, conv, domain_length=cfg.grid.length)
        worst = max(worst, r.relative)
        print(
            " ".join(
                [str(i)]
                + [fmt(v) for v in (tf.t0, tf.x0, tf.width_t, tf.width_x)]
                + [f"{v:.3e}" for v in (r.r_m, r.r_n, r.scale_m, r.scale_n, r.relative)]
            )
        )
    print(f"max_relative={worst:.3e}")

    free = cfg.verify.free
    fixed = {k: v for k, v in vars(sol.params).items() if k not in free}
    report = weakcheck.recover_constraint(
        sol.kind, fixed, free, scan={name: cfg.verify.scan for name in free},
        tfs=tfs, convention=conv,
    )
    if report.found:
        print("recovered " + " ".join(f"{k}={fmt(v)}" for k, v in report.values.items())
              + f" residual_norm={report.residual_norm:.3e}")
    else:
        print(f"recovered none ({report.message}; best residual_norm={report.residual_norm:.3e})")

    if worst < cfg.verify.threshold:
        _reason("residuals_below_threshold")
        return EXIT_OK
    _reason("residuals_above_threshold")
    return EXIT_FAILURE


def cmd_eta(big_c: float, m0: float, n0: float, ratio: float | None = None) -> int:
    problem = diagnostics.EtaProblem(big_c, m0, n0)
    try:
        res = diagnostics.solve_eta(problem)
    except HypothesisNotMetError as exc:
        print(f"hypothesis not met: {exc}", file=sys.stderr)
        _reason("hypothesis_not_met")
        return EXIT_HYPOTHESIS
    q = m0 / n0 if ratio is None else ratio
    print(f"C={fmt(big_c)} M0={fmt(m0)} N0={fmt(n0)}")
    print(f"eta={fmt(res.eta)}")
    print(f"f(eta)={fmt(res.f_eta)}")
    print(f"f'(eta)={fmt(res.fprime_eta)}")
    print(f"ratio_bound={fmt(res.ratio_bound)}")
    print(f"ratio={fmt(q)}")
    print(f"inequality_holds={'yes' if q < res.ratio_bound else 'no'}")
    _reason("ok")
    return EXIT_OK


def cmd_besov_norm(path: str | Path, s: float, p: float, r: float, column: str = "u") -> int:
    cols = {"m": 1, "n": 2, "u": 3, "v": 4}
    try:
        idx = besov.BesovIndex(s=s, p=p, r=r)
        _, data = read_snapshot(path)
        grid = grid_from_nodes(data[0])
        part = besov.build_partition(grid)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        _reason("io_error")
        return EXIT_FAILURE
    except (ValueError, TwoCompError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        _reason("malformed_input")
        return EXIT_FAILURE
    f = data[cols[column]]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", besov.BandTruncationWarning)
        blocks = besov.block_norms(f, idx, part)
        norm = besov.besov_norm(f, idx, part)
    for w in caught[:1]:
        print(f"warning: {w.message}", file=sys.stderr)
    print(f"norm={fmt(norm)}")
    print("q weighted_block_norm")
    for q, val in blocks:
        print(f"{q} {fmt(val)}")
    _reason("ok")
    return EXIT_OK


# --- entry point ------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        _reason("usage_error")
        sys.exit(EXIT_FAILURE)


def _number(text: str) -> float:
    val = float(text)
    if math.isnan(val):
        raise argparse.ArgumentTypeError("NaN is not a number here")
    return val


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="twocomp", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ev = sub.add_parser("evolve", help="integrate the Cauchy problem and write data files")
    ev.add_argument("--config", required=True, help="flat key=value configuration file")
    ev.add_argument("--output-dir", help="overrides outputs.directory")

    ve = sub.add_parser("verify-exact", help="distributional residuals of a peakon or kink")
    ve.add_argument("--config", required=True)
    ve.add_argument("--output-dir", help="accepted for symmetry; nothing is written")

    et = sub.add_parser("eta", help="blow-up time bound from C, M(0), N(0)")
    et.add_argument("big_c", metavar="C", type=_number)
    et.add_argument("m0", metavar="M0", type=_number)
    et.add_argument("n0", metavar="N0", type=_number)
    et.add_argument("--ratio", type=_number, help="M(0)/N(0) to test (default M0/N0)")

    bn = sub.add_parser("besov-norm", help="Besov norm of a snapshot column")
    bn.add_argument("file")
    bn.add_argument("--s", type=_number, default=1.0)
    bn.add_argument("--p", type=_number, default=2.0, help="2 or inf")
    bn.add_argument("--r", type=_number, default=2.0, help="1, 2 or inf")
    bn.add_argument("--column", choices=("m", "n", "u", "v"), default="u")
    return parser


def _load_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.command == "eta":
        return cmd_eta(args.big_c, args.m0, args.n0, args.ratio)
    if args.command == "besov-norm":
        return cmd_besov_norm(args.file, args.s, args.p, args.r, args.column)
    try:
        cfg = _load_config(args.config)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        _reason("io_error")
        return EXIT_FAILURE
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        _reason("config_error")
        return EXIT_FAILURE
    if args.command == "evolve":
        return cmd_evolve(cfg, args.output_dir)
    try:
        return cmd_verify_exact(cfg)
    except TwoCompError as exc:
        print(f"error: {exc}", file=sys.stderr)
        _reason("invalid_parameters")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
