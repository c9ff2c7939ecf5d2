from __future__ import annotations

import logging

import pandas as pd
import pytest

from app.cli.commands import EXIT_INVALID, EXIT_IO, EXIT_OK, parse_task_range
from app.core.errors import ConfigurationError
from app.main import main
from app.schemas.clock import ClockMap
from app.services.timebase import max_delay_ns


def _scenario(tmp_path, body: str):
    path = tmp_path / "scenario.toml"
    path.write_text(body, encoding="utf-8")
    return str(path)


def _tasks(n: int, period_ns: int = 1_000_000_000) -> str:
    return "".join(f'[[tasks]]\nid = "t{i}"\nperiod_ns = {period_ns}\n' for i in range(n))


# ============================================================================
# run
# ============================================================================

def test_run_default_scenario(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--out", str(out)]) == EXIT_OK
    assert sorted(p.name for p in out.iterdir()) == ["report.csv", "trace_hardware.csv", "trace_software.csv"]

    report = pd.read_csv(out / "report.csv")
    assert list(report["mode"]) == ["software", "hardware"]
    assert list(report["n_tasks"]) == [12, 12]
    assert list(report["overhead_ns_per_s"]) == [800_000.0, 9000.0]
    assert (report["speedup"] >= 10).all()


def test_run_scenario_file(tmp_path):
    scenario = _scenario(tmp_path, 'scenario_id = "two"\n' + _tasks(2, 100_000_000))
    out = tmp_path / "out"
    assert main(["run", "--scenario", scenario, "--out", str(out)]) == EXIT_OK
    trace = pd.read_csv(out / "trace_hardware.csv")
    assert (trace["kind"] == "task_woken").sum() == 20
    assert list(pd.read_csv(out / "report.csv")["scenario_id"]) == ["two", "two"]


def test_run_mode_override(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--out", str(out), "--mode", "software", "--seed", "7"]) == EXIT_OK
    assert sorted(p.name for p in out.iterdir()) == ["report.csv", "trace_software.csv"]
    report = pd.read_csv(out / "report.csv", keep_default_na=False)
    assert list(report["speedup"]) == [""]


def test_run_without_tasks(tmp_path):
    scenario = _scenario(tmp_path, 'scenario_id = "idle"\n')
    out = tmp_path / "out"
    assert main(["run", "--scenario", scenario, "--out", str(out)]) == EXIT_OK
    report = pd.read_csv(out / "report.csv", keep_default_na=False)
    assert list(report["overhead_ns_per_s"]) == [0.0, 0.0]
    assert list(report["speedup"]) == ["", ""]
    assert pd.read_csv(out / "trace_software.csv").empty


def test_run_capacity_error(tmp_path, caplog):
    scenario = _scenario(tmp_path, 'mode = "hardware"\n[device]\nn_slots = 12\n' + _tasks(13))
    with caplog.at_level(logging.ERROR):
        code = main(["run", "--scenario", scenario, "--out", str(tmp_path / "out")])
    assert code == EXIT_INVALID
    assert "13 tasks exceed the 12 slots" in caplog.text
    assert not (tmp_path / "out").exists()


def test_run_rejects_period_below_master_tick(tmp_path, caplog):
    scenario = _scenario(tmp_path, _tasks(1, 5_000_000))
    with caplog.at_level(logging.ERROR):
        code = main(["run", "--scenario", scenario, "--out", str(tmp_path / "out"), "--mode", "software"])
    assert code == EXIT_INVALID
    assert "period_ns=5000000 is shorter than the 10000000 ns master tick" in caplog.text
    assert main(["run", "--scenario", scenario, "--out", str(tmp_path / "hw"), "--mode", "hardware"]) == EXIT_OK


def test_run_validation_error_names_field(tmp_path, caplog):
    scenario = _scenario(tmp_path, "[clock]\nfpga_freq_hz = 0\n")
    with caplog.at_level(logging.ERROR):
        code = main(["run", "--scenario", scenario, "--out", str(tmp_path / "out")])
    assert code == EXIT_INVALID
    assert "clock.fpga_freq_hz" in caplog.text


@pytest.mark.parametrize("verb", [["run"], ["sweep", "--tasks", "1..2"]])
def test_scenario_not_utf8_exits_invalid(tmp_path, caplog, verb):
    path = tmp_path / "latin1.toml"
    path.write_bytes(b'scenario_id = "\xff"\n')
    with caplog.at_level(logging.ERROR):
        code = main([*verb, "--scenario", str(path), "--out", str(tmp_path / "out")])
    assert code == EXIT_INVALID
    assert "not UTF-8" in caplog.text
    assert not (tmp_path / "out").exists()


def test_run_missing_file(tmp_path):
    code = main(["run", "--scenario", str(tmp_path / "absent.toml"), "--out", str(tmp_path / "out")])
    assert code == EXIT_IO


def test_run_is_byte_identical(tmp_path):
    scenario = _scenario(
        tmp_path,
        '[[tasks]]\nid = "a"\nperiod_ns = 30_000_000\n'
        '[[tasks]]\nid = "b"\nperiod_ns = 45_500_000\noffset_ns = 1_234\n',
    )
    first, second = tmp_path / "first", tmp_path / "second"
    assert main(["run", "--scenario", scenario, "--out", str(first)]) == EXIT_OK
    assert main(["run", "--scenario", scenario, "--out", str(second)]) == EXIT_OK
    for name in ("report.csv", "trace_software.csv", "trace_hardware.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


# ============================================================================
# sweep
# ============================================================================

def test_sweep_full_range(tmp_path):
    out = tmp_path / "sweep"
    assert main(["sweep", "--tasks", "1..12", "--out", str(out)]) == EXIT_OK
    latency = pd.read_csv(out / "latency_sweep.csv")
    assert (latency["mode"] == "software").sum() == 12
    assert (latency["mode"] == "hardware").sum() == 12
    improvement = pd.read_csv(out / "improvement.csv")
    assert list(improvement["n_tasks"]) == list(range(1, 13))
    grid = pd.read_csv(out / "improvement_grid.csv")
    assert set(grid["period_ns"]) == {10_000_000, 100_000_000, 1_000_000_000}
    assert {"sw_cpu_load", "hw_cpu_load"} <= set(improvement.columns)
    handlers = pd.read_csv(out / "handler_times.csv")
    assert len(handlers) == 24
    assert set(handlers["fit_slope_ns"].round(6)) == {500.0}


def test_sweep_single_count(tmp_path):
    out = tmp_path / "sweep"
    assert main(["sweep", "--tasks", "1..1", "--out", str(out)]) == EXIT_OK
    latency = pd.read_csv(out / "latency_sweep.csv")
    assert list(latency["n_tasks"]) == [1, 1]


def test_sweep_inverted_range(tmp_path):
    assert main(["sweep", "--tasks", "5..2", "--out", str(tmp_path / "sweep")]) == EXIT_INVALID


def test_sweep_beyond_capacity(tmp_path):
    assert main(["sweep", "--tasks", "1..13", "--out", str(tmp_path / "sweep")]) == EXIT_INVALID


# ============================================================================
# resources
# ============================================================================

def test_resources_to_stdout(capsys):
    assert main(["resources", "--tasks", "1..12", "--width", "64"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "n_tasks,flip_flops,luts,max_delay_ns"
    assert len(lines) == 13
    assert lines[1] == f"1,129,256,{max_delay_ns(64, ClockMap())}"
    assert lines[-1].startswith("12,844,")


def test_resources_single_bit(capsys):
    assert main(["resources", "--tasks", "1", "--width", "1"]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[1] == "1,3,4,9"


def test_resources_to_file(tmp_path):
    path = tmp_path / "resources.csv"
    assert main(["resources", "--tasks", "1..3", "--out", str(path)]) == EXIT_OK
    assert path.read_text(encoding="utf-8").splitlines()[1:] == [
        f"{row},{max_delay_ns(64, ClockMap())}" for row in ("1,129,256", "2,194,384", "3,259,512")
    ]


@pytest.mark.parametrize("args", [["--width", "0"], ["--width", "65"], ["--tasks", "0..3"], ["--tasks", "abc"]])
def test_resources_invalid_input(args):
    argv = ["resources", "--tasks", "1..12", *args]
    assert main(argv) == EXIT_INVALID


# ============================================================================
# range parsing
# ============================================================================

@pytest.mark.parametrize(
    "text, expected",
    [("1..12", list(range(1, 13))), ("3..3", [3]), ("4", [4]), (" 2 .. 4 ", [2, 3, 4])],
)
def test_parse_task_range(text, expected):
    assert parse_task_range(text) == expected


@pytest.mark.parametrize("text", ["12..1", "0..4", "1-12", "", "1..x"])
def test_parse_task_range_rejects(text):
    with pytest.raises(ConfigurationError):
        parse_task_range(text)
