import json
import math

import numpy as np
import pytest

from sfp.cli import cli_main
from sfp.io import ingest_events, read_fits, read_model


def run(capsys, *argv):
    code = cli_main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestGenerate:
    def test_emits_events_csv(self, capsys):
        code, out, _ = run(capsys, "generate", "--model", "sfp", "--mu", "300",
                           "--n", "50", "--seed", "7")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "individual_id,timestamp_s"
        assert len(lines) == 51

    def test_deterministic(self, capsys):
        args = ("generate", "--model", "sfp", "--mu", "300", "--n", "1000",
                "--seed", "7")
        _, first, _ = run(capsys, *args)
        _, second, _ = run(capsys, *args)
        assert first == second

    def test_all_models(self, capsys, tmp_path):
        for model in ("sfp", "sfp-star", "legacy", "pp"):
            out_path = tmp_path / f"{model}.csv"
            code, _, _ = run(capsys, "generate", "--model", model, "--mu", "60",
                             "--n", "40", "--seed", "1", "--output", str(out_path))
            assert code == 0
            (ev,) = ingest_events(out_path)
            assert len(ev) == 40

    def test_theta_and_multi_flags(self, capsys):
        code, out, _ = run(capsys, "generate", "--model", "sfp", "--mu", "60",
                           "--n", "50", "--seed", "2", "--theta", "10", "--multi")
        assert code == 0
        (ev,) = ingest_events_from_text(out)
        gaps = np.diff(np.concatenate([[0.0], ev.timestamps]))
        assert gaps.min() >= 10.0

    def test_round_up_integral(self, capsys):
        code, out, _ = run(capsys, "generate", "--model", "sfp", "--mu", "60",
                           "--n", "30", "--seed", "3", "--round-up")
        assert code == 0
        (ev,) = ingest_events_from_text(out)
        assert np.all(ev.timestamps == np.round(ev.timestamps))

    def test_usage_errors(self, capsys):
        code, _, err = run(capsys, "generate", "--model", "sfp", "--mu", "-1",
                           "--n", "5")
        assert code == 1 and "mu" in err
        code, _, _ = run(capsys, "generate", "--model", "pp", "--mu", "60",
                         "--n", "5", "--theta", "4")
        assert code == 1
        code, _, _ = run(capsys, "generate", "--model", "nope", "--mu", "1", "--n", "1")
        assert code == 1


def ingest_events_from_text(text):
    import io as _io

    return ingest_events(_io.StringIO(text))


class TestFitPipeline:
    @pytest.fixture
    def events_file(self, tmp_path, capsys):
        path = tmp_path / "events.csv"
        cli_main(["generate", "--model", "sfp", "--mu", "300", "--n", "2000",
                  "--seed", "11", "--id", "alice", "--output", str(path)])
        more = tmp_path / "more.csv"
        cli_main(["generate", "--model", "sfp", "--mu", "120", "--n", "1500",
                  "--seed", "12", "--id", "bob", "--output", str(more)])
        with open(path, "a") as fh:
            fh.write(more.read_text().split("\n", 1)[1])
        capsys.readouterr()
        return path

    def test_generate_fit_composes(self, capsys, events_file, tmp_path):
        fits_path = tmp_path / "fits.csv"
        code, _, _ = run(capsys, "fit", "--input", str(events_file),
                         "--output", str(fits_path))
        assert code == 0
        fits = read_fits(fits_path)
        assert sorted(f.individual_id for f in fits) == ["alice", "bob"]
        alice = next(f for f in fits if f.individual_id == "alice")
        assert alice.n == 2000
        assert abs(alice.rho - 1.0) < 0.3
        assert alice.h1 is True

    def test_short_series_skipped_with_warning(self, capsys, tmp_path):
        path = tmp_path / "short.csv"
        path.write_text("individual_id,timestamp_s\nx,1\nx,2\nx,3\n")
        code, out, err = run(capsys, "fit", "--input", str(path))
        assert code == 0
        assert "skipping x" in err
        assert len(out.splitlines()) == 1  # header only

    def test_or_curve_subcommand(self, capsys, events_file):
        code, out, _ = run(capsys, "or-curve", "--input", str(events_file),
                           "--individual", "alice")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "log_t,log_or"
        assert len(lines) == 100

    def test_or_curve_needs_individual_when_multiple(self, capsys, events_file):
        code, _, err = run(capsys, "or-curve", "--input", str(events_file))
        assert code == 1
        assert "--individual" in err

    def test_acf_subcommand(self, capsys, events_file):
        code, out, _ = run(capsys, "acf", "--input", str(events_file),
                           "--individual", "bob", "--max-lag", "5")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "lag,ac,band"
        assert len(lines) == 6

    def test_missing_file_is_data_error(self, capsys):
        code, _, _ = run(capsys, "fit", "--input", "/nonexistent/events.csv")
        assert code == 2

    def test_bad_header_is_data_error(self, capsys, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        code, _, _ = run(capsys, "fit", "--input", str(path))
        assert code == 2


class TestSynthAndAnomaly:
    def test_synth_window_contract(self, capsys):
        code, out, _ = run(capsys, "synth", "--system", "Phone", "--individuals",
                           "10", "--window-days", "30", "--seed", "1")
        assert code == 0
        stamps = [float(line.split(",")[1]) for line in out.splitlines()[1:]]
        assert max(stamps) < 30 * 86400

    def test_synth_deterministic(self, capsys):
        args = ("synth", "--system", "Meta", "--individuals", "5",
                "--window-days", "2", "--seed", "9")
        _, first, _ = run(capsys, *args)
        _, second, _ = run(capsys, *args)
        assert first == second

    def test_unknown_system_usage_error(self, capsys):
        code, _, err = run(capsys, "synth", "--system", "Friendster",
                           "--individuals", "2", "--window-days", "1")
        assert code == 1
        assert "known systems" in err

    def test_full_loop_with_model_json(self, capsys, tmp_path):
        events = tmp_path / "ev.csv"
        fits = tmp_path / "fits.csv"
        model = tmp_path / "model.json"
        anomalies = tmp_path / "anomalies.csv"
        assert cli_main(["synth", "--system", "Digg", "--individuals", "40",
                         "--window-days", "20", "--seed", "4",
                         "--output", str(events)]) == 0
        assert cli_main(["fit", "--input", str(events), "--output", str(fits)]) == 0
        assert cli_main(["population-fit", "--fits", str(fits),
                         "--output", str(model)]) == 0
        loaded = read_model(model)
        assert loaded.system_name == "fitted"
        assert cli_main(["anomaly", "--fits", str(fits), "--model", str(model),
                         "--output", str(anomalies)]) == 0
        lines = anomalies.read_text().splitlines()
        assert lines[0] == "individual_id,d2,fit_ok,label"
        labels = {line.split(",")[-1] for line in lines[1:]}
        assert labels <= {"normal", "A1", "A2", "A3"}
        capsys.readouterr()


class TestVerify:
    def test_fast_verify_reports(self, capsys):
        code, out, _ = run(capsys, "verify", "--fast", "--seed", "3")
        assert code == 0
        report = json.loads(out)
        assert report["all_passed"] is True
        cal = next(c for c in report["checks"] if c["name"] == "c_mu_linearity")
        assert cal["passed"] is True

    def test_verify_deterministic(self, capsys):
        _, first, _ = run(capsys, "verify", "--fast", "--seed", "5")
        _, second, _ = run(capsys, "verify", "--fast", "--seed", "5")
        assert first == second


class TestEnvSeed:
    def test_env_fallback(self, capsys, monkeypatch):
        monkeypatch.setenv("SFP_SEED", "21")
        _, via_env, _ = run(capsys, "generate", "--model", "sfp", "--mu", "60",
                            "--n", "50")
        monkeypatch.delenv("SFP_SEED")
        _, via_flag, _ = run(capsys, "generate", "--model", "sfp", "--mu", "60",
                             "--n", "50", "--seed", "21")
        assert via_env == via_flag

    def test_bad_env_seed(self, capsys, monkeypatch):
        monkeypatch.setenv("SFP_SEED", "oops")
        code, _, _ = run(capsys, "generate", "--model", "sfp", "--mu", "60", "--n", "5")
        assert code == 1

    def test_no_command_prints_usage(self, capsys):
        code, _, err = run(capsys)
        assert code == 1
        assert "usage" in err
