import json

import pytest

from symbandit.cli import main
from symbandit.experiments import read_csv


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestDp:
    def test_one_round_values(self, capsys):
        code, out, _ = run(capsys, "dp", "--T", "1", "--eps", "0.3")
        assert code == 0
        assert "v = 0.545" in out
        assert "vbar = 0.3" in out

    def test_gamma_parameterization(self, capsys):
        code, out, _ = run(capsys, "dp", "--T", "100", "--gamma", "0.707")
        assert code == 0
        assert out.startswith("v = ")

    def test_requires_exactly_one_gap_flag(self, capsys):
        code, _, err = run(capsys, "dp", "--T", "10")
        assert code == 1
        assert "exactly one of --eps or --gamma" in err
        code, _, err = run(capsys, "dp", "--T", "10", "--eps", "0.1", "--gamma", "1.0")
        assert code == 1

    def test_precondition_violation_exits_1(self, capsys):
        code, _, err = run(capsys, "dp", "--T", "0", "--eps", "0.1")
        assert code == 1
        assert "horizon" in err

    def test_trace_file(self, capsys, tmp_path):
        path = tmp_path / "trace.csv"
        code, out, _ = run(capsys, "dp", "--T", "8", "--eps", "0.2",
                           "--trace", str(path))
        assert code == 0
        meta, rows = read_csv(path)
        assert len(rows) == 9
        assert "config" in meta and meta["symbandit_version"] == "0.1.0"


class TestUsageErrors:
    def test_unknown_subcommand_exits_2(self, capsys):
        assert main(["frobnicate"]) == 2

    def test_missing_required_flag_exits_2(self, capsys):
        assert main(["dp"]) == 2


class TestPrefactor:
    def test_maximizer_paper_mode(self, capsys):
        code, out, _ = run(capsys, "prefactor", "--which", "c", "--round3")
        assert code == 0
        assert "gamma_star = 0.707" in out
        assert "c(gamma_star) = 0.572" in out

    def test_point_evaluation(self, capsys):
        code, out, _ = run(capsys, "prefactor", "--which", "c_bar",
                           "--gamma", "1.274", "--round3")
        assert code == 0
        assert "0.530" in out


class TestPde:
    def test_components_printed(self, capsys):
        code, out, _ = run(capsys, "pde", "--T", "100", "--gamma", "0.707",
                           "--branch", "C1")
        assert code == 0
        for key in ("u =", "u_h =", "phi =", "phi_hat =", "ubar ="):
            assert key in out

    def test_zero_gap_rejected(self, capsys):
        code, _, err = run(capsys, "pde", "--T", "10", "--eps", "0")
        assert code == 1


class TestSimulate:
    def test_json_output_deterministic(self, capsys):
        args = ("simulate", "--T", "20", "--eps", "0.1", "--episodes", "2000",
                "--seed", "42", "--json")
        code, out1, _ = run(capsys, *args)
        assert code == 0
        code, out2, _ = run(capsys, *args)
        assert out1 == out2
        payload = json.loads(out1)
        assert payload["episodes"] == 2000
        assert payload["seed"] == 42
        assert "config" in payload

    def test_audit_log(self, capsys, tmp_path):
        path = tmp_path / "audit.jsonl"
        code, out, _ = run(capsys, "simulate", "--T", "10", "--eps", "0.2",
                           "--episodes", "100", "--seed", "1",
                           "--audit", str(path), "--audit-episodes", "3")
        assert code == 0
        lines = path.read_text().strip().splitlines()
        assert len(lines) == 3
        rec = json.loads(lines[0])
        assert len(rec["choices"]) == 10

    def test_table_strategy(self, capsys, tmp_path):
        table = tmp_path / "strategy.txt"
        lines = ["# t xi_r p1"]
        T = 3
        for t in range(-T, 0):
            k = T + t
            for x in range(-k, k + 1, 2):
                lines.append(f"{t} {x} 0.5")
        table.write_text("\n".join(lines) + "\n")
        code, out, _ = run(capsys, "simulate", "--T", "3", "--eps", "0.2",
                           "--episodes", "500", "--seed", "2",
                           "--strategy", f"table:{table}")
        assert code == 0
        assert "regret_mean" in out


class TestSweep:
    def test_convergence_sweep_reproducible(self, capsys, tmp_path):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text(
            "# medium-gap convergence\n"
            "regime = medium\n"
            "T_list = 16, 64\n"
            "gamma = 0.707\n"
            "branch = C1\n"
            "seed = 5\n"
        )
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(capsys, "sweep", "--config", str(cfg), "--out", str(out1))[0] == 0
        assert run(capsys, "sweep", "--config", str(cfg), "--out", str(out2))[0] == 0
        assert out1.read_bytes() == out2.read_bytes()
        meta, rows = read_csv(out1)
        assert len(rows) == 2
        assert meta["config"].startswith("sweep:convergence")

    def test_error_scaling_sweep(self, capsys, tmp_path):
        cfg = tmp_path / "fit.cfg"
        cfg.write_text(
            "regime = large\n"
            "T_list = 256\n"
            "eps_list = 0.1, 0.2, 0.4\n"
            "branch = C0\n"
        )
        out = tmp_path / "fit.csv"
        code, stdout, _ = run(capsys, "sweep", "--config", str(cfg),
                              "--kind", "error-scaling", "--out", str(out))
        assert code == 0
        assert "slope =" in stdout
        meta, rows = read_csv(out)
        assert "fit_slope" in meta
        assert len(rows) == 3

    def test_bad_config_exits_1(self, capsys, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("regime = medium\n")  # missing T_list
        code, _, err = run(capsys, "sweep", "--config", str(cfg),
                           "--out", str(tmp_path / "x.csv"))
        assert code == 1
        assert "missing" in err


class TestFigure:
    def test_grid_row_count(self, capsys, tmp_path):
        out = tmp_path / "figure_c.csv"
        code, stdout, _ = run(capsys, "figure", "--grid", "0.01:5:0.01",
                              "--out", str(out))
        assert code == 0
        meta, rows = read_csv(out)
        assert len(rows) == 500
        assert "500 rows" in stdout

    def test_reproducible_bytes(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(capsys, "figure", "--grid", "0.5:2:0.5", "--out", str(a))
        run(capsys, "figure", "--grid", "0.5:2:0.5", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_bad_grid_exits_1(self, capsys, tmp_path):
        code, _, err = run(capsys, "figure", "--grid", "nope",
                           "--out", str(tmp_path / "x.csv"))
        assert code == 1


class TestVerify:
    def test_verify_passes(self, capsys):
        code, out, _ = run(capsys, "verify")
        assert code == 0
        assert "FAIL" not in out
        assert out.count("PASS") >= 15
        assert "0 failures" in out
