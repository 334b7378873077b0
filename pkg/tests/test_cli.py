"""Command line harness: config validation, outputs, exit codes, and the
bit-for-bit reproducibility of the CSV reports."""

import json
from pathlib import Path

import pytest

from evocalc.cli import ConfigError, main, parse_config, run, suite


def write(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


class TestConfigParsing:
    def test_valid_config(self, tmp_path):
        cfg = parse_config(write(tmp_path / "a.cfg", """
            # spectral check
            experiment = spectrum
            nu = 0.5
            n = 256
        """.replace("            ", "")))
        assert cfg["experiment"] == "spectrum"
        assert cfg["n"] == 256
        assert cfg["tol.circle"] == 1e-12  # default merged in

    def test_unknown_key_rejected(self, tmp_path):
        p = write(tmp_path / "a.cfg", "experiment = spectrum\nwibble = 3\n")
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config(p)

    def test_unknown_experiment_rejected(self, tmp_path):
        p = write(tmp_path / "a.cfg", "experiment = nonsense\n")
        with pytest.raises(ConfigError, match="unknown experiment"):
            parse_config(p)

    def test_missing_experiment(self, tmp_path):
        p = write(tmp_path / "a.cfg", "nu = 1.0\n")
        with pytest.raises(ConfigError, match="missing"):
            parse_config(p)

    def test_empty_scales_rejected(self, tmp_path):
        p = write(tmp_path / "a.cfg", "experiment = timprod\nscales = \n")
        with pytest.raises(ConfigError):
            parse_config(p)

    def test_scales_parse_as_list(self, tmp_path):
        p = write(tmp_path / "a.cfg", "experiment = timprod\nscales = 8, 16\n")
        assert parse_config(p)["scales"] == (8, 16)

    def test_bad_expect_rejected(self, tmp_path):
        p = write(tmp_path / "a.cfg", "experiment = spectrum\nexpect = maybe\n")
        with pytest.raises(ConfigError, match="expect"):
            parse_config(p)


class TestRun:
    def test_run_writes_csv_and_json(self, tmp_path):
        p = write(tmp_path / "s.cfg", "experiment = spectrum\nn = 256\noutput = out/s\n")
        status = run(p)
        assert status == 0
        csv_path = tmp_path / "out" / "s.csv"
        json_path = tmp_path / "out" / "s.json"
        assert csv_path.exists() and json_path.exists()
        head = csv_path.read_text().splitlines()[0]
        assert head == "scale,pairing_error,strong_error,norm_error,bound_rhs,verdict"
        summary = json.loads(json_path.read_text())
        assert summary["experiment"] == "spectrum"
        assert summary["verdict"] == "pass"
        assert "runtime_seconds" in summary

    def test_invalid_config_nonzero_status(self, tmp_path):
        p = write(tmp_path / "bad.cfg", "experiment = spectrum\nnope = 1\n")
        assert run(p) == 1

    def test_failing_verdict_nonzero_status(self, tmp_path):
        p = write(tmp_path / "neg.cfg",
                  "experiment = dbf\nscales = 8\ncontrol = arithmetic\n")
        assert run(p) == 2

    def test_csv_bit_identical_across_runs(self, tmp_path):
        p = write(tmp_path / "s.cfg", "experiment = picard\nseed = 42\n")
        run(p, out_override=tmp_path / "r1")
        run(p, out_override=tmp_path / "r2")
        assert (tmp_path / "r1.csv").read_bytes() == (tmp_path / "r2.csv").read_bytes()


class TestSuite:
    def test_aggregate_with_expect_fail(self, tmp_path):
        write(tmp_path / "a_pass.cfg", "experiment = spectrum\nn = 256\n")
        write(tmp_path / "b_neg.cfg",
              "experiment = dbf\nscales = 8\ncontrol = arithmetic\nexpect = fail\n")
        status = suite(tmp_path)
        assert status == 0
        summary = json.loads((tmp_path / "suite_summary.json").read_text())
        assert summary["verdict"] == "pass"
        by_name = {c["config"]: c for c in summary["configs"]}
        assert by_name["b_neg.cfg"]["verdict"] == "fail"
        assert by_name["b_neg.cfg"]["effective"] == "pass"

    def test_child_failure_propagates(self, tmp_path):
        write(tmp_path / "neg.cfg",
              "experiment = dbf\nscales = 8\ncontrol = arithmetic\n")
        assert suite(tmp_path) == 2
        # partial reports are preserved
        assert (tmp_path / "neg.csv").exists()

    def test_empty_directory(self, tmp_path):
        assert suite(tmp_path) == 1

    def test_main_entrypoint(self, tmp_path):
        p = write(tmp_path / "s.cfg", "experiment = spectrum\nn = 256\n")
        assert main(["run", str(p)]) == 0
        assert main(["suite", str(tmp_path)]) == 0

    def test_suite_all_as_experiment_name(self, tmp_path):
        sub = tmp_path / "children"
        sub.mkdir()
        write(sub / "s.cfg", "experiment = spectrum\nn = 256\n")
        p = write(tmp_path / "all.cfg",
                  f"experiment = suite-all\nconfigs_dir = {sub}\n")
        assert run(p) == 0
