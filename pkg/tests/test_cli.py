"""CLI behavior: flags, formats, exit codes, and server parity."""

import json

import pytest
from fastapi.testclient import TestClient

from aerocell import cli
from aerocell.app import create_app

FASTTOL = ["--rel-tol", "1e-6", "--abs-tol", "1e-9"]


def run_cli(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestAnalyze:
    def test_text_smoke(self, capsys):
        code, out, err = run_cli(["analyze", *FASTTOL], capsys)
        assert code == 0
        line = next(l for l in out.splitlines() if l.startswith("p_cov "))
        value = float(line.split()[1])
        assert 0.0 <= value <= 1.0

    def test_set_override_equals_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "base.json"
        cfg.write_text(json.dumps({"h_a_m": 140.0}))
        c1, out1, _ = run_cli(["analyze", "--config", str(cfg), *FASTTOL], capsys)
        c2, out2, _ = run_cli(["analyze", "--set", "h_a_m=140", *FASTTOL], capsys)
        assert c1 == c2 == 0
        assert out1 == out2

    def test_json_format_and_db_flags(self, capsys):
        code, out, _ = run_cli(["analyze", "--format", "json", "--beta-db", "3",
                                "--tau-db", "5", *FASTTOL], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["beta"] == pytest.approx(10 ** 0.3)
        assert doc["tau_b"] == pytest.approx(10 ** 0.5)
        assert doc["a_g"] + doc["a_a"] == pytest.approx(1.0)

    def test_config_errors_exit_2(self, tmp_path, capsys):
        assert run_cli(["analyze", "--set", "h_a_m"], capsys)[0] == 2
        assert run_cli(["analyze", "--set", "altitude=3"], capsys)[0] == 2
        assert run_cli(["analyze", "--config", str(tmp_path / "nope.json")],
                       capsys)[0] == 2
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run_cli(["analyze", "--config", str(bad)], capsys)[0] == 2

    def test_out_writes_file(self, tmp_path, capsys):
        target = tmp_path / "report.txt"
        code, out, _ = run_cli(["analyze", "--out", str(target), *FASTTOL], capsys)
        assert code == 0
        assert out == ""
        assert "p_cov" in target.read_text()


class TestSimulate:
    def test_same_seed_same_bytes(self, capsys):
        argv = ["simulate", "--trials", "80", "--seed", "4"]
        c1, out1, _ = run_cli(argv, capsys)
        c2, out2, _ = run_cli(argv, capsys)
        assert c1 == c2 == 0
        assert out1 == out2

    def test_center_mode_reports_backhaul_only(self, capsys):
        code, out, _ = run_cli(["simulate", "--trials", "60", "--seed", "1",
                                "--mode", "center-uav", "--format", "json"], capsys)
        assert code == 0
        doc = json.loads(out)
        assert set(doc["metrics"]) == {"a_los", "a_nlos", "s_backhaul"}


class TestSweep:
    def test_csv_contract_and_determinism(self, capsys):
        argv = ["sweep", "--axis", "h_a", "--values", "60:100:20",
                "--metrics", "a_g", "--mode", "analytic", *FASTTOL]
        c1, out1, _ = run_cli(argv, capsys)
        c2, out2, _ = run_cli(argv, capsys)
        assert c1 == c2 == 0
        assert out1 == out2
        lines = out1.strip().splitlines()
        assert lines[0] == "h_a,a_g_analytic,a_g_analytic_err,error"
        assert len(lines) == 4
        assert [l.split(",")[0] for l in lines[1:]] == ["60", "80", "100"]

    def test_empty_values_header_only(self, capsys):
        code, out, _ = run_cli(["sweep", "--axis", "beta", "--values", "",
                                "--metrics", "p_cov"], capsys)
        assert code == 0
        assert out.strip() == "beta,p_cov_analytic,p_cov_analytic_err,error"

    def test_simulated_threshold_sweep(self, capsys):
        code, out, _ = run_cli(["sweep", "--axis", "beta", "--values", "0.5,2.0",
                                "--metrics", "p_cov", "--mode", "simulate",
                                "--trials", "120", "--seed", "9"], capsys)
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "beta,p_cov_sim,p_cov_sim_ci,error"
        loose = float(lines[1].split(",")[1])
        strict = float(lines[2].split(",")[1])
        assert strict <= loose


class TestValidate:
    def test_defaults_pass(self, capsys):
        code, out, _ = run_cli(["validate", "--trials", "400", "--seed", "3",
                                *FASTTOL], capsys)
        assert code == 0
        assert "OVERALL: PASS" in out

    def test_truncated_window_detected(self, capsys):
        # slow-decay interference with a tiny window: simulation loses mass
        # the analytics keep, and the association row blows past 3 sigma
        code, out, _ = run_cli(["validate", "--set", "eta_g=2.1",
                                "--trials", "1500", "--seed", "3",
                                "--r-sim-scale", "0.05", *FASTTOL], capsys)
        assert code == 1
        assert "FAIL" in out


class TestServerMode:
    @pytest.fixture()
    def patched_client(self, monkeypatch):
        app = create_app()
        monkeypatch.setattr(cli, "_make_client", lambda server: TestClient(app))

    def test_analyze_parity(self, patched_client, capsys):
        local = run_cli(["analyze", "--format", "json", *FASTTOL], capsys)
        remote = run_cli(["analyze", "--format", "json", "--server",
                          "http://testserver", *FASTTOL], capsys)
        assert local[0] == remote[0] == 0
        assert local[1] == remote[1]

    def test_sweep_parity(self, patched_client, capsys):
        argv = ["sweep", "--axis", "lambda_g", "--values", "5e-7,2e-6",
                "--metrics", "p_cov", *FASTTOL]
        local = run_cli(argv, capsys)
        remote = run_cli([*argv, "--server", "http://testserver"], capsys)
        assert local[0] == remote[0] == 0
        assert local[1] == remote[1]

    def test_remote_config_error_exit_2(self, patched_client, capsys):
        code, _, err = run_cli(["analyze", "--set", "altitude=3",
                                "--server", "http://testserver"], capsys)
        assert code == 2
        assert "altitude" in err
