import math
import os
import subprocess
import sys

import numpy as np
import pytest

from twocomp import besov, cli, spectral
from twocomp.errors import ConfigurationError

R3 = "1.7320508075688772"


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def reason(err):
    lines = [l for l in err.splitlines() if l.startswith("reason=")]
    assert len(lines) == 1, err
    return lines[0].split("=", 1)[1]


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


class TestParseConfig:
    def test_empty(self):
        with pytest.raises(ConfigurationError, match="initial.kind required"):
            cli.parse_config("")

    def test_peakon_c2_derived(self):
        cfg = cli.parse_config(f"initial.kind=peakon\ninitial.c1={R3}\ninitial.c=-1\nphysics.b=0\n")
        assert cfg.initial["c2"] == pytest.approx(math.sqrt(3), rel=1e-15)
        assert cfg.kind == "peakon" and cfg.b == 0.0

    def test_cfl_range(self):
        with pytest.raises(ConfigurationError, match=r"line 1: solver.cfl"):
            cli.parse_config("solver.cfl=1.5\ninitial.kind=gaussian\n")

    def test_defaults(self):
        cfg = cli.parse_config("initial.kind=gaussian")
        s = cfg.solver
        assert (s.cfl, s.dt_max, s.dealias, s.blowup_sup_cap, s.blowup_slope_floor) == (0.4, 1e-3, True, 1e6, -1e6)

    def test_unknown_key(self):
        with pytest.raises(ConfigurationError, match=r"line 2: solver.speed: unknown key"):
            cli.parse_config("initial.kind=gaussian\nsolver.speed=3\n")

    def test_unparsable(self):
        with pytest.raises(ConfigurationError, match=r"line 3: grid.length"):
            cli.parse_config("# header\ninitial.kind=gaussian\ngrid.length=abc\n")

    def test_invariant_violation_names_key(self):
        with pytest.raises(ConfigurationError, match=r"line 2: grid.n_points"):
            cli.parse_config("initial.kind=gaussian\ngrid.n_points=1000\n")

    def test_comments_and_blank_lines(self):
        cfg = cli.parse_config("\n# c\ninitial.kind = gaussian  # trailing\n\nsolver.dealias=off\n")
        assert cfg.solver.dealias is False

    def test_parameter_of_other_family(self):
        with pytest.raises(ConfigurationError, match="initial.big_c1"):
            cli.parse_config("initial.kind=peakon\ninitial.c1=1\ninitial.c=1\ninitial.big_c1=2\n")

    def test_kink_needs_b(self):
        with pytest.raises(ConfigurationError, match="physics.b"):
            cli.parse_config("initial.kind=kink\ninitial.big_c1=1\n")

    def test_kink_derived(self):
        cfg = cli.parse_config("initial.kind=kink\ninitial.big_c1=1\nphysics.b=-2\n")
        assert (cfg.initial["big_c2"], cfg.initial["c"]) == (2.0, 1.0)

    def test_duplicate(self):
        with pytest.raises(ConfigurationError, match="duplicate"):
            cli.parse_config("initial.kind=gaussian\ninitial.kind=gaussian\n")

    def test_besov_indices(self):
        cfg = cli.parse_config("initial.kind=gaussian\noutputs.besov_indices=1.4:2:2, 1:inf:1\n")
        assert cfg.outputs.besov_indices == (besov.BesovIndex(1.4, 2, 2), besov.BesovIndex(1.0, math.inf, 1))


class TestEvolve:
    def test_zero_data(self, tmp_path, capsys):
        cfg = write(tmp_path, "z.cfg", "initial.kind=gaussian\ninitial.u_amp=0\ninitial.v_amp=0\n"
                    "grid.n_points=64\ngrid.length=10\nsolver.t_end=0.01\n")
        code, out, err = run_cli(capsys, "evolve", "--config", cfg, "--output-dir", str(tmp_path / "o"))
        assert code == 0 and reason(err) == "completed"
        lines = (tmp_path / "o" / "diagnostics.csv").read_text().splitlines()
        assert lines[0] == "t,h1,h2,sup_m,sup_n,inf_slope,sup_skew,blowup_integral"
        for row in lines[1:]:
            assert row.split(",")[1:] == ["0"] * 7

    def test_outputs(self, tmp_path, capsys):
        cfg = write(tmp_path, "g.cfg", "initial.kind=gaussian\ninitial.v_center=1\ngrid.n_points=256\n"
                    "grid.length=30\nsolver.t_end=0.02\noutputs.snapshot_every=10\n"
                    "outputs.characteristics.enabled=on\noutputs.characteristics.seed_count=5\n"
                    "outputs.besov_indices=1.0:2:2\n")
        out_dir = tmp_path / "o"
        code, _, err = run_cli(capsys, "evolve", "--config", cfg, "--output-dir", str(out_dir))
        assert code == 0
        snap = (out_dir / "snap_1.txt").read_text().splitlines()
        assert snap[0].startswith("# t=")
        assert len(snap) == 257 and len(snap[1].split()) == 5
        x0 = float(snap[1].split()[0])
        assert x0 == -15.0
        rows = (out_dir / "diagnostics.csv").read_text().splitlines()
        value = rows[2].split(",")[1]
        assert float(value) == float(format(float(value), ".17g"))
        chars = (out_dir / "characteristics.csv").read_text().splitlines()
        assert chars[0] == "t,seed,q,log_jacobian,log_skew"
        assert (out_dir / "slope_tracking.csv").exists()
        assert (out_dir / "besov.csv").read_text().startswith("t,field,s,p,r,norm")
        assert "termination=completed" in (out_dir / "verdict.txt").read_text()

    def test_peakon_crest(self, tmp_path, capsys):
        cfg = write(tmp_path, "p.cfg", f"initial.kind=peakon\ninitial.c1={R3}\ninitial.c=-1\n"
                    "grid.n_points=2048\ngrid.length=40\nsolver.t_end=0.5\noutputs.snapshot_every=100000\n")
        code, _, _ = run_cli(capsys, "evolve", "--config", cfg, "--output-dir", str(tmp_path / "o"))
        assert code == 0
        snaps = sorted((tmp_path / "o").glob("snap_*.txt"))
        data = np.loadtxt(snaps[-1])
        crest = data[np.argmax(data[:, 3]), 0]
        # Measured speed is c1 c2 / 3 = +1 (see the notes on the peakon relation).
        assert abs(crest - 0.5) <= 3 * 40 / 2048

    def test_blowup_stop(self, tmp_path, capsys):
        cfg = write(tmp_path, "b.cfg", "initial.kind=gaussian\ninitial.u_amp=3\ninitial.v_amp=3\n"
                    "initial.v_center=0.5\ngrid.n_points=256\ngrid.length=30\nsolver.t_end=1\n"
                    "solver.slope_floor=-40\n")
        code, _, err = run_cli(capsys, "evolve", "--config", cfg, "--output-dir", str(tmp_path / "o"))
        assert code == 2 and reason(err) == "blowup_slope"
        verdict = (tmp_path / "o" / "verdict.txt").read_text()
        assert "termination=blowup_slope" in verdict and "inf_slope" in verdict

    def test_config_error_exit(self, tmp_path, capsys):
        cfg = write(tmp_path, "e.cfg", "")
        code, _, err = run_cli(capsys, "evolve", "--config", cfg)
        assert code == 1 and reason(err) == "config_error" and "initial.kind required" in err

    def test_missing_config_file(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "evolve", "--config", str(tmp_path / "nope.cfg"))
        assert code == 1 and reason(err) == "io_error"

    def test_unwritable_output(self, tmp_path, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        cfg = write(tmp_path, "g.cfg", "initial.kind=gaussian\ngrid.n_points=64\nsolver.t_end=0.001\n")
        code, _, err = run_cli(capsys, "evolve", "--config", cfg, "--output-dir", str(blocker / "sub"))
        assert code == 1 and reason(err) == "io_error"

    def test_thread_count_determinism(self, tmp_path):
        cfg = write(tmp_path, "g.cfg", "initial.kind=gaussian\ninitial.v_center=1\ngrid.n_points=256\n"
                    "grid.length=30\nsolver.t_end=0.05\n")
        outputs = []
        for threads in ("1", "4"):
            env = dict(os.environ, TWOCOMP_THREADS=threads)
            out = tmp_path / f"o{threads}"
            subprocess.run([sys.executable, "-m", "twocomp", "evolve", "--config", cfg, "--output-dir", str(out)],
                           check=True, env=env, capture_output=True)
            outputs.append((out / "diagnostics.csv").read_bytes())
        assert outputs[0] == outputs[1]


class TestVerifyExact:
    def test_kink_speed(self, tmp_path, capsys):
        cfg = write(tmp_path, "k.cfg", "initial.kind=kink\ninitial.big_c1=1\ninitial.big_c2=2\nphysics.b=-2\n"
                    "initial.c=-1\ngrid.length=80\nverify.free=c\n")
        code, out, err = run_cli(capsys, "verify-exact", "--config", cfg)
        assert code == 0 and reason(err) == "residuals_below_threshold"
        rows = [l for l in out.splitlines() if l[:1].isdigit()]
        assert len(rows) >= 10
        rec = [l for l in out.splitlines() if l.startswith("recovered")][0]
        assert abs(float(rec.split()[1].split("=")[1]) + 1.0) < 1e-6

    def test_kink_amplitude(self, tmp_path, capsys):
        cfg = write(tmp_path, "k.cfg", "initial.kind=kink\ninitial.big_c1=1\nphysics.b=-2\ninitial.c=-1\n"
                    "grid.length=80\nverify.free=big_c2\n")
        code, out, _ = run_cli(capsys, "verify-exact", "--config", cfg)
        rec = [l for l in out.splitlines() if l.startswith("recovered")][0]
        assert abs(float(rec.split()[1].split("=")[1]) - 2.0) < 1e-6
        assert code == 0

    def test_documented_peakon_reports_failure(self, tmp_path, capsys):
        cfg = write(tmp_path, "p.cfg", f"initial.kind=peakon\ninitial.c1={R3}\ninitial.c=-1\ngrid.length=80\n"
                    "verify.scan_min=-3\nverify.scan_max=3\n")
        code, out, err = run_cli(capsys, "verify-exact", "--config", cfg)
        assert code == 1 and reason(err) == "residuals_above_threshold"
        assert "recovered c=1" in out

    def test_gaussian_rejected(self, tmp_path, capsys):
        cfg = write(tmp_path, "g.cfg", "initial.kind=gaussian\n")
        code, _, err = run_cli(capsys, "verify-exact", "--config", cfg)
        assert code == 1 and reason(err) == "config_error"


class TestEta:
    def test_reference(self, capsys):
        code, out, err = run_cli(capsys, "eta", "1", "-4", "1")
        assert code == 0 and reason(err) == "ok"
        vals = dict(l.split("=", 1) for l in out.splitlines() if "=" in l and " " not in l)
        assert 0 < float(vals["eta"]) < 0.5
        assert abs(float(vals["f'(eta)"])) < 1e-10

    def test_boundary(self, capsys):
        code, _, err = run_cli(capsys, "eta", "1", "-2", "1")
        assert code == 3 and reason(err) == "hypothesis_not_met"

    def test_deterministic(self, capsys):
        a = run_cli(capsys, "eta", "1", "-4", "1")
        b = run_cli(capsys, "eta", "1", "-4", "1")
        assert a == b

    def test_bad_number(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["eta", "1", "x", "1"])
        assert exc.value.code == 1
        assert reason(capsys.readouterr().err) == "usage_error"


def snapshot_file(tmp_path, name, grid, u):
    rows = np.column_stack([grid.x, u, u, u, u])
    p = tmp_path / name
    np.savetxt(p, rows, fmt="%.17g", header="t=0", comments="# ")
    return str(p)


class TestBesovNorm:
    grid = spectral.make_grid(4096, 80.0)

    def test_zero(self, tmp_path, capsys):
        f = snapshot_file(tmp_path, "z.txt", self.grid, np.zeros(4096))
        code, out, err = run_cli(capsys, "besov-norm", f)
        assert code == 0 and reason(err) == "ok"
        assert out.splitlines()[0] == "norm=0"

    def test_peakon_vs_sobolev(self, tmp_path, capsys):
        u = np.exp(-np.abs(self.grid.x))
        f = snapshot_file(tmp_path, "p.txt", self.grid, u)
        code, out, _ = run_cli(capsys, "besov-norm", f, "--s", "1.0", "--p", "2", "--r", "2")
        norm = float(out.splitlines()[0].split("=")[1])
        ratio = besov.sobolev_norm(self.grid, u, 1.0) / norm
        assert code == 0 and 0.25 <= ratio <= 4.0

    def test_scaling(self, tmp_path, capsys):
        u = np.exp(-self.grid.x**2)
        a = run_cli(capsys, "besov-norm", snapshot_file(tmp_path, "a.txt", self.grid, u))[1]
        b = run_cli(capsys, "besov-norm", snapshot_file(tmp_path, "b.txt", self.grid, 2 * u))[1]
        na, nb = (float(o.splitlines()[0].split("=")[1]) for o in (a, b))
        assert nb == pytest.approx(2 * na, rel=1e-14)

    def test_table(self, tmp_path, capsys):
        f = snapshot_file(tmp_path, "g.txt", self.grid, np.exp(-self.grid.x**2))
        out = run_cli(capsys, "besov-norm", f)[1].splitlines()
        assert out[1] == "q weighted_block_norm" and out[2].startswith("-1 ")

    @pytest.mark.parametrize("text", ["garbage\n", "1 2 3\n", "", "0 1 1 1 1\n0 1 1 1 1\n"])
    def test_malformed(self, tmp_path, capsys, text):
        f = write(tmp_path, "bad.txt", text)
        code, _, err = run_cli(capsys, "besov-norm", f)
        assert code == 1 and reason(err) == "malformed_input"

    def test_bad_index(self, tmp_path, capsys):
        f = snapshot_file(tmp_path, "z.txt", self.grid, np.zeros(4096))
        code, _, err = run_cli(capsys, "besov-norm", f, "--p", "3")
        assert code == 1 and reason(err) == "malformed_input"

    def test_missing_file(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "besov-norm", str(tmp_path / "none.txt"))
        assert code == 1 and reason(err) == "io_error"


def test_usage_error_reason(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 1
    assert reason(capsys.readouterr().err) == "usage_error"
