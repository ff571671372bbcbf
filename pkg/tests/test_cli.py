"""End-to-end command-line workflows and exit-code contract."""

from __future__ import annotations

import json

import numpy as np
import pytest

from hpsusp import cli, config, lookup


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture(scope="module")
def table_file(tmp_path_factory, bench_table):
    path = tmp_path_factory.mktemp("tables") / "bench.hplt"
    lookup.save_table(bench_table, path)
    return str(path)


@pytest.fixture()
def trace_file(tmp_path, capsys):
    path = tmp_path / "trace.csv"
    code, out, _ = run_cli(capsys, "simulate", "--freq", "5", "--amp", "0.005",
                           "--out", str(path))
    assert code == 0 and "wrote" in out
    return str(path)


class TestExitCodes:
    def test_missing_subcommand_is_usage_error(self, capsys):
        code, _, err = run_cli(capsys)
        assert code == 2

    def test_unknown_flag_is_usage_error(self, capsys):
        code, _, _ = run_cli(capsys, "simulate", "--freq", "5", "--amp",
                             "0.005", "--out", "x.csv", "--bogus")
        assert code == 2

    def test_lookup_mode_without_table(self, capsys, trace_file, tmp_path):
        code, _, err = run_cli(capsys, "estimate", "--trace", trace_file,
                               "--mode", "lookup", "--out",
                               str(tmp_path / "o.csv"))
        assert code == 2 and "requires --table" in err

    def test_missing_trace_file_is_input_error(self, capsys, tmp_path):
        code, _, _ = run_cli(capsys, "estimate", "--trace",
                             str(tmp_path / "nope.csv"),
                             "--out", str(tmp_path / "o.csv"))
        assert code == 3

    def test_malformed_trace_is_input_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("t_s,p1_pa\n0,800000\n0.01,not-a-number\n")
        code, _, _ = run_cli(capsys, "estimate", "--trace", str(bad),
                             "--out", str(tmp_path / "o.csv"))
        assert code == 3

    def test_corrupt_table_is_input_error(self, capsys, trace_file, tmp_path):
        blob = tmp_path / "junk.hplt"
        blob.write_bytes(b"NOPE" + b"\x00" * 64)
        code, _, _ = run_cli(capsys, "estimate", "--trace", trace_file,
                             "--mode", "lookup", "--table", str(blob),
                             "--out", str(tmp_path / "o.csv"))
        assert code == 3

    def test_overstroke_is_numerical_error(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "simulate", "--freq", "5", "--amp",
                               "0.2", "--out", str(tmp_path / "x.csv"))
        assert code == 4 and "numerical error" in err


class TestWorkflows:
    def test_simulate_then_estimate_iterative(self, capsys, trace_file,
                                              tmp_path):
        out = tmp_path / "breakdown.csv"
        code, text, _ = run_cli(capsys, "estimate", "--trace", trace_file,
                                "--out", str(out))
        assert code == 0
        assert "rel RMSE" in text and "R2" in text
        data = np.genfromtxt(out, delimiter=",", names=True)
        np.testing.assert_allclose(
            data["f_gas_n"] + data["f_damp_n"] + data["f_fric_n"],
            data["f_out_n"], rtol=1e-12)

    def test_simulate_then_estimate_lookup(self, capsys, trace_file,
                                           table_file, tmp_path):
        out = tmp_path / "lookup.csv"
        code, text, _ = run_cli(capsys, "estimate", "--trace", trace_file,
                                "--mode", "lookup", "--table", table_file,
                                "--omega", "auto", "--out", str(out))
        assert code == 0
        data = np.genfromtxt(out, delimiter=",", names=True)
        assert {"t_s", "f_out_n", "v_mps", "h_m"} <= set(data.dtype.names)

    def test_build_table_and_bench(self, capsys, tmp_path):
        out = tmp_path / "small.hplt"
        code, text, _ = run_cli(capsys, "build-table", "--frequencies", "3,5",
                                "--out", str(out))
        assert code == 0 and "2 grids" in text
        table = lookup.load_table(out, config.bench_prototype())
        assert table.frequencies_hz == (3.0, 5.0)

        report = tmp_path / "bench.json"
        code, text, _ = run_cli(capsys, "bench", "--table", str(out),
                                "--samples", "12000", "--repeats", "11",
                                "--json", str(report))
        assert code == 0 and "speedup" in text
        rep = json.loads(report.read_text())
        assert rep["speedup"] > 1.0

    def test_wheel_load_pipeline(self, capsys, tmp_path):
        trace = tmp_path / "truck.csv"
        code, _, _ = run_cli(capsys, "simulate", "--preset", "mining-truck",
                             "--quarter-car", "--freq", "8", "--amp", "0.002",
                             "--duration", "4", "--out", str(trace))
        assert code == 0

        table = tmp_path / "truck.hplt"
        code, _, _ = run_cli(capsys, "build-table", "--preset", "mining-truck",
                             "--frequencies", "7,8", "--out", str(table))
        assert code == 0

        out = tmp_path / "wheel.csv"
        code, text, _ = run_cli(capsys, "wheel-load", "--preset",
                                "mining-truck", "--trace", str(trace),
                                "--table", str(table), "--out", str(out))
        assert code == 0 and "rel RMSE" in text
        data = np.genfromtxt(out, delimiter=",", names=True)
        assert np.all(np.isfinite(data["f_tire_n"]))

    def test_config_file_flag(self, capsys, tmp_path):
        cfg_path = tmp_path / "run.cfg"
        config.save_run_config(config.bench_run_config(), cfg_path)
        code, _, _ = run_cli(capsys, "simulate", "--config", str(cfg_path),
                             "--freq", "5", "--amp", "0.005",
                             "--out", str(tmp_path / "t.csv"))
        assert code == 0
