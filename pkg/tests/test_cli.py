import json

import pytest

from tvpssm.cli import main

pytestmark = pytest.mark.filterwarnings("ignore::UserWarning")


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def series_csv(tmp_path_factory):
    p = tmp_path_factory.mktemp("data") / "series.csv"
    assert run("simulate", "--out", p, "--length", "144", "--seed", "7") == 0
    return p


class TestSimulate:
    def test_writes_loadable_csv(self, tmp_path):
        out = tmp_path / "sim.csv"
        assert run("simulate", "--out", out, "--length", "60",
                   "--missing-fraction", "0.05", "--seed", "3") == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "t,value"
        assert len(lines) == 61
        assert sum("NA" in ln for ln in lines) == 3

    def test_identical_seed_identical_bytes(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run("simulate", "--out", a, "--seed", "9")
        run("simulate", "--out", b, "--seed", "9")
        assert a.read_bytes() == b.read_bytes()

    def test_invalid_spec_is_config_error(self, tmp_path):
        assert run("simulate", "--out", tmp_path / "x.csv",
                   "--length", "10") == 1


class TestFit:
    def test_outputs_and_determinism(self, series_csv, tmp_path):
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        args = ("fit", "--input", series_csv, "--iters", "800", "--burnin",
                "400", "--seed", "5", "--select", "tau", "mu0", "x[100]",
                "b1[144]")
        assert run(*args, "--outdir", out1) == 0
        assert run(*args, "--outdir", out2) == 0
        trace = (out1 / "trace.csv").read_text().splitlines()
        assert trace[0] == "tau,mu0,x[100],b1[144]"
        assert len(trace) == 401
        assert (out1 / "trace.csv").read_bytes() == (out2 / "trace.csv").read_bytes()
        assert (out1 / "summary.csv").read_bytes() == (out2 / "summary.csv").read_bytes()
        m1 = json.loads((out1 / "manifest.json").read_text())
        m2 = json.loads((out2 / "manifest.json").read_text())
        assert "sampling_seconds" in m1["timings"]
        m1.pop("timings")
        m2.pop("timings")
        assert m1 == m2

    def test_burnin_not_below_iters(self, series_csv, tmp_path):
        assert run("fit", "--input", series_csv, "--outdir", tmp_path / "o",
                   "--iters", "100", "--burnin", "100") == 1
        assert not (tmp_path / "o").exists()

    def test_missing_input_is_data_error(self, tmp_path):
        assert run("fit", "--input", tmp_path / "nope.csv",
                   "--outdir", tmp_path / "o") == 2

    def test_malformed_input_is_data_error(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("t,value\n1,20\n3,21\n", encoding="utf-8")
        assert run("fit", "--input", bad, "--outdir", tmp_path / "o") == 2

    def test_numerical_failure_exit_code(self, series_csv, tmp_path):
        assert run("fit", "--input", series_csv, "--outdir", tmp_path / "o",
                   "--iters", "200", "--burnin", "100",
                   "--hyper", "xi0=1e308") == 3

    def test_unknown_hyper_is_config_error(self, series_csv, tmp_path):
        assert run("fit", "--input", series_csv, "--outdir", tmp_path / "o",
                   "--hyper", "zeta=3") == 1

    def test_jobs_across_inputs(self, series_csv, tmp_path):
        other = tmp_path / "other.csv"
        run("simulate", "--out", other, "--length", "144", "--seed", "8")
        out = tmp_path / "multi"
        assert run("fit", "--input", series_csv, other, "--outdir", out,
                   "--iters", "400", "--burnin", "200", "--jobs", "2") == 0
        assert (out / "series" / "trace.csv").exists()
        assert (out / "other" / "trace.csv").exists()

    def test_outdir_env_var_default(self, series_csv, tmp_path, monkeypatch):
        monkeypatch.setenv("TVPSSM_OUTDIR", str(tmp_path / "from_env"))
        assert run("fit", "--input", series_csv,
                   "--iters", "400", "--burnin", "200") == 0
        assert (tmp_path / "from_env" / "trace.csv").exists()

    def test_config_file_with_flag_override(self, series_csv, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "mcmc": {"n_iter": 600, "burn_in": 300},
            "hyper": {"c_x": 150.0},
            "select": ["tau"],
        }), encoding="utf-8")
        out = tmp_path / "o"
        assert run("fit", "--input", series_csv, "--outdir", out,
                   "--config", cfg, "--seed", "2") == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["mcmc"]["n_iter"] == 600
        assert manifest["hyper"]["c_x"] == 150.0
        assert manifest["mcmc"]["seed"] == 2


class TestForecast:
    def test_row_count_and_histogram(self, series_csv, tmp_path):
        out = tmp_path / "fc"
        assert run("forecast", "--input", series_csv, "--outdir", out,
                   "--iters", "800", "--burnin", "400", "--horizon", "12",
                   "--histogram", "--bins", "25") == 0
        lines = (out / "forecast.csv").read_text().splitlines()
        assert lines[0] == "h,median,lower,upper"
        assert len(lines) == 13
        hist = (out / "histogram.csv").read_text().splitlines()
        assert hist[0] == "h,bin_left,bin_right,count"
        counts = {}
        for ln in hist[1:]:
            h, _, _, c = ln.split(",")
            counts[h] = counts.get(h, 0) + int(c)
        assert set(counts.values()) == {400}  # n_paths per horizon

    def test_degenerate_levels(self, series_csv, tmp_path):
        out = tmp_path / "fc2"
        assert run("forecast", "--input", series_csv, "--outdir", out,
                   "--iters", "600", "--burnin", "300",
                   "--levels", "0.5", "0.5") == 0
        rows = (out / "forecast.csv").read_text().splitlines()[1:]
        for row in rows:
            _, med, lo, hi = row.split(",")
            assert med == lo == hi


class TestValidate:
    def test_compare_emits_side_by_side(self, series_csv, tmp_path):
        out = tmp_path / "val"
        assert run("validate", "--input", series_csv, "--outdir", out,
                   "--iters", "2500", "--burnin", "1200", "--seed", "7",
                   "--compare") == 0
        lines = (out / "validation.csv").read_text().splitlines()
        header = lines[0].split(",")
        assert "error_seasonal" in header and "error_baseline" in header
        assert len(lines) == 13
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["rmse"]["seasonal"] < manifest["rmse"]["baseline"]

    def test_horizon_exceeding_series(self, series_csv, tmp_path):
        assert run("validate", "--input", series_csv,
                   "--outdir", tmp_path / "v", "--horizon", "200") == 1


class TestCheck:
    def test_quick_check_passes(self, tmp_path):
        assert run("check", "--oracle-states", "1", "--geweke-samples",
                   "8000", "--seed", "5", "--outdir", tmp_path) == 0
        payload = json.loads((tmp_path / "check.json").read_text())
        assert payload["pass"] is True
        targets = {entry["target"] for entry in payload["oracle"]}
        assert targets >= {"tau", "mu0", "x0", "x", "bt0", "bt1", "bts",
                           "b0", "b1", "bs", "ystar"}

    def test_injected_fault_fails(self, tmp_path):
        assert run("check", "--oracle-states", "1", "--geweke-samples",
                   "8000", "--seed", "5", "--inject-fault",
                   "--outdir", tmp_path) == 4
