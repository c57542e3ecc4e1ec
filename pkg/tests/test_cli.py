"""End-to-end tests of the command-line driver and its artifact contracts."""

import json

import numpy as np
import pytest

from clinewave.cli import main


def run_cli(args, tmp_path, name="run"):
    out = tmp_path / name
    code = main(list(args) + ["--out", str(out)])
    return code, out


class TestStandingCommand:
    def test_writes_profiles_and_report(self, tmp_path):
        code, out = run_cli(
            ["standing", "--S", "0.6", "--r", "0.25", "--svg"], tmp_path)
        assert code == 0
        for name in ("profile_quadrature.csv", "profile_shooting.csv",
                     "phase_plane_orbit.csv", "report.json", "manifest.json",
                     "profile.svg", "phase_plane.svg"):
            assert (out / name).exists()
        report = json.loads((out / "report.json").read_text())
        assert report["cross_method_sup_gap"] < 1e-6
        assert report["quadrature"]["symmetry_defect"] < 1e-8
        assert report["quadrature"]["condition_S_lt_4r"] is True
        header = (out / "profile_quadrature.csv").read_text().splitlines()[0]
        assert header == "x,u,du"

    def test_fig2_preset_runs_both_regimes(self, tmp_path):
        code, out = run_cli(
            ["standing", "--preset", "fig2", "--dx", "0.05"], tmp_path)
        assert code == 0
        holds = json.loads((out / "condition-holds" / "report.json").read_text())
        fails = json.loads((out / "condition-fails" / "report.json").read_text())
        assert holds["shooting"]["condition_S_lt_4r"] is True
        assert fails["shooting"]["condition_S_lt_4r"] is False

    def test_manifest_records_defaults(self, tmp_path):
        code, out = run_cli(["standing", "--S", "0.25", "--r", "0.25"], tmp_path)
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["toolkit_version"]
        assert "dx" in manifest["defaulted"]
        assert "x_max" in manifest["defaulted"]
        assert manifest["resolved"]["S"] == 0.25
        assert len(manifest["run_id"]) == 12

    def test_deterministic_bytes(self, tmp_path):
        _, out_a = run_cli(["standing", "--S", "0.25", "--r", "0.25"], tmp_path, "a")
        _, out_b = run_cli(["standing", "--S", "0.25", "--r", "0.25"], tmp_path, "b")
        assert ((out_a / "profile_quadrature.csv").read_bytes()
                == (out_b / "profile_quadrature.csv").read_bytes())
        assert ((out_a / "manifest.json").read_bytes()
                == (out_b / "manifest.json").read_bytes())


class TestConfigHandling:
    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("# comment\nS = 0.25\nr = 0.25\ndx = 0.05\n")
        code, out = run_cli(
            ["standing", "--config", str(cfg), "--r", "0.3"], tmp_path)
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["resolved"]["S"] == 0.25
        assert manifest["resolved"]["r"] == 0.3  # flag wins

    def test_unknown_config_key_exits_2(self, tmp_path):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("bogus = 1\n")
        code = main(["standing", "--config", str(cfg),
                     "--out", str(tmp_path / "x")])
        assert code == 2

    def test_malformed_config_line_exits_2(self, tmp_path):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("just words\n")
        code = main(["standing", "--config", str(cfg),
                     "--out", str(tmp_path / "x")])
        assert code == 2

    def test_invariant_violation_exits_3_with_error_json(self, tmp_path):
        out = tmp_path / "bad"
        code = main(["simulate", "--model", "pqd", "--sA", "0.5", "--SA", "0.1",
                     "--out", str(out)])
        assert code == 3
        err = json.loads((out / "error.json").read_text())
        assert err["exit_code"] == 3
        assert err["error"] == "ValueError"

    def test_numerical_failure_exits_4(self, tmp_path):
        # reaction overshoot from a hostile dt on the reduced model
        out = tmp_path / "blowup"
        code = main(["simulate", "--model", "reduced", "--init", "logistic",
                     "--S", "0.1", "--r", "0.001", "--dt", "5.0",
                     "--t-end", "50", "--out", str(out)])
        assert code == 4
        err = json.loads((out / "error.json").read_text())
        assert err["exit_code"] == 4


class TestSpeedCommand:
    def test_theory_table_over_r_grid(self, tmp_path):
        code, out = run_cli(
            ["speed", "--S", "0.1", "--r-grid", "0.1:0.5:0.05", "--s", "0.01"],
            tmp_path)
        assert code == 0
        lines = (out / "speed_table.csv").read_text().splitlines()
        assert lines[0].startswith("r,c1_exact,c1_series2,c1_star,speed_exact")
        assert len(lines) == 1 + 9
        first = dict(zip(lines[0].split(","), map(float, lines[1].split(","))))
        assert first["c1_exact"] == pytest.approx(4.157462, rel=1e-5)

    def test_requires_r_or_grid(self, tmp_path):
        code = main(["speed", "--S", "0.1", "--out", str(tmp_path / "x")])
        assert code == 2


class TestStabilityCommand:
    def test_reports_spectrum_and_residuals(self, tmp_path):
        code, out = run_cli(
            ["stability", "--S", "0.1", "--r", "0.1", "--k", "4"], tmp_path)
        assert code == 0
        res = json.loads((out / "residuals.json").read_text())
        assert abs(res["lambda_0"]) < 1e-3
        assert res["lambda_1"] < -0.01
        assert res["kernel_cosine_with_slope"] > 0.999
        assert res["solvability_ratio"] == pytest.approx(res["c1_exact"], rel=1e-6)
        eigvals = (out / "eigenvalues.csv").read_text().splitlines()
        assert len(eigvals) == 1 + 4
        vecs = np.loadtxt(out / "eigenvectors.csv", delimiter=",", skiprows=1)
        assert vecs.shape[1] == 1 + 4


class TestSimulateCommand:
    def test_reduced_run_artifacts(self, tmp_path):
        code, out = run_cli(
            ["simulate", "--model", "reduced", "--S", "0.1", "--r", "0.1",
             "--eps", "0.001", "--t-end", "50", "--dt", "0.25"], tmp_path)
        assert code == 0
        header = (out / "trajectory.csv").read_text().splitlines()[0]
        assert header == "t,x,u_reduced"
        fronts = (out / "fronts.csv").read_text().splitlines()
        assert fronts[0] == "t,front_u_reduced"

    def test_gamete_model_runs(self, tmp_path):
        code, out = run_cli(
            ["simulate", "--model", "gametes", "--S", "0.1", "--r", "0.1",
             "--t-end", "20", "--dt", "0.5", "--half-width", "130"], tmp_path)
        assert code == 0
        header = (out / "trajectory.csv").read_text().splitlines()[0]
        assert header == "t,x,u,v,w,z"


class TestCompareCommand:
    def test_single_point_comparison(self, tmp_path):
        code, out = run_cli(
            ["compare", "--S", "0.1", "--r-grid", "0.5:0.5:0.1", "--s", "0.01",
             "--t-end", "150"], tmp_path)
        assert code == 0
        lines = (out / "speed_comparison.csv").read_text().splitlines()
        assert len(lines) == 2
        plot = (out / "speed_plot_data.csv").read_text().splitlines()
        assert plot[0].startswith("r,measured_original,predicted_star_original")


class TestOutputRoot:
    def test_env_var_sets_default_root(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CLINEWAVE_OUT", str(tmp_path / "envroot"))
        monkeypatch.chdir(tmp_path)
        code = main(["speed", "--S", "0.1", "--r", "0.2"])
        assert code == 0
        runs = list((tmp_path / "envroot").glob("speed-*/speed_table.csv"))
        assert len(runs) == 1


class TestSweepCommand:
    def test_parallel_product_of_runs(self, tmp_path):
        out = tmp_path / "sweepy"
        code = main(["sweep", "standing", "--vary", "S=0.1,0.25",
                     "--vary", "r=0.25", "--threads", "2",
                     "--out", str(out), "--", "--dx", "0.05"])
        assert code == 0
        for sub in ("S=0.1_r=0.25", "S=0.25_r=0.25"):
            assert (out / sub / "report.json").exists()
            manifest = json.loads((out / sub / "manifest.json").read_text())
            assert manifest["resolved"]["dx"] == 0.05
        top = json.loads((out / "manifest.json").read_text())
        assert sorted(top["runs"]) == ["S=0.1_r=0.25", "S=0.25_r=0.25"]

    def test_unknown_vary_key_exits_2(self, tmp_path):
        code = main(["sweep", "standing", "--vary", "zap=1,2",
                     "--out", str(tmp_path / "x")])
        assert code == 2
