"""
run / sweep / resources verbs. Each returns a process exit code:
0 success, 1 invalid input (validation, capacity, range), 2 I/O failure.
"""
import functools
import logging
import re
import sys
from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from app.core.config import settings
from app.core.errors import ConfigurationError, TimeManagerError
from app.crud.csv_store import load_scenario, write_report_csv, write_table_csv, write_trace_csv
from app.schemas.scenario import ScenarioFile, SimMode, default_scenario
from app.services.bench import build_run_report, estimate_resources, latency_sweep, pair_reports
from app.services.figures import (
    handler_timing_table,
    improvement_grid,
    improvement_table,
    resource_table,
    uniform_task_set,
)
from app.services.simkit import run_scenario, validate_task_set

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2

_RANGE = re.compile(r"^\s*(\d+)\s*(?:\.\.\s*(\d+)\s*)?$")


def _one_line(error: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(part) for part in err['loc']) or 'scenario'}: {err['msg']}"
        for err in error.errors()
    )


def exit_codes(command):
    """Map library exceptions to exit codes with a single log line"""

    @functools.wraps(command)
    def wrapper(*args, **kwargs) -> int:
        try:
            return command(*args, **kwargs)
        except ValidationError as e:
            logger.error(f"✗ invalid scenario: {_one_line(e)}")
            return EXIT_INVALID
        except TimeManagerError as e:
            logger.error(f"✗ {type(e).__name__}: {e}")
            return EXIT_INVALID
        except OSError as e:
            logger.error(f"✗ I/O error: {e}")
            return EXIT_IO

    return wrapper


def parse_task_range(text: str) -> list[int]:
    """'min..max' (inclusive) or a single count"""
    match = _RANGE.match(text)
    if not match:
        raise ConfigurationError(f"--tasks expects <min>..<max>, got {text!r}")
    low = int(match.group(1))
    high = int(match.group(2)) if match.group(2) is not None else low
    if low < 1:
        raise ConfigurationError(f"--tasks must start at 1 or more, got {low}")
    if high < low:
        raise ConfigurationError(f"--tasks range {text!r} is inverted")
    return list(range(low, high + 1))


def resolve_scenario(path: Optional[str]) -> ScenarioFile:
    if path is None:
        logger.info("No scenario file given, using the embedded default scenario")
        return default_scenario()
    return load_scenario(path)


def _grid_periods(scenario: ScenarioFile) -> list[int]:
    """Decades of the base period up to the default task period, plus the scenario's own periods"""
    periods = {task.period_ns for task in scenario.tasks}
    period = scenario.clock.base_period_ns
    while True:
        periods.add(period)
        if period >= settings.DEFAULT_TASK_PERIOD_NS:
            break
        period *= 10
    return sorted(periods)


def _modes(mode: Optional[str], scenario: ScenarioFile) -> list[SimMode]:
    if mode is None:
        return scenario.modes
    if mode == "both":
        return [SimMode.SOFTWARE, SimMode.HARDWARE]
    return [SimMode(mode)]


# ============================================================================
# VERBS
# ============================================================================

@exit_codes
def cmd_run(
    scenario_path: Optional[str],
    out_dir: str,
    mode: Optional[str] = None,
) -> int:
    scenario = resolve_scenario(scenario_path)
    modes = _modes(mode, scenario)
    tasks = scenario.task_specs()
    device = scenario.device

    # every mode validated before the first simulation starts
    for sim_mode in modes:
        validate_task_set(tasks, scenario.clock, sim_mode, device.n_slots, device.counter_width_bits)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    reports = {}
    for sim_mode in modes:
        trace = run_scenario(
            tasks,
            scenario.clock,
            scenario.cost,
            sim_mode,
            scenario.duration_ns,
            n_slots=device.n_slots,
            counter_width_bits=device.counter_width_bits,
        )
        write_trace_csv(trace, out / f"trace_{sim_mode.value}.csv")
        reports[sim_mode] = build_run_report(
            trace, scenario.scenario_id, sim_mode, len(tasks), scenario.duration_ns
        )

    if SimMode.HARDWARE in reports and tasks:
        reports[SimMode.HARDWARE] = reports[SimMode.HARDWARE].model_copy(
            update={'resource_estimate': estimate_resources(len(tasks), device.counter_width_bits)}
        )
    if len(reports) == 2:
        reports[SimMode.SOFTWARE], reports[SimMode.HARDWARE] = pair_reports(
            reports[SimMode.SOFTWARE], reports[SimMode.HARDWARE]
        )

    write_report_csv([reports[m] for m in modes], out / "report.csv")
    for report in reports.values():
        speedup = "" if report.speedup is None else f", speedup {report.speedup:.2f}"
        logger.info(
            f"✓ {report.mode}: {report.overhead_ns_per_s:,.0f} ns/s overhead, "
            f"{report.wakeups_per_s:g} wake-ups/s{speedup}"
        )
    logger.info(f"Outputs written to {out}")
    return EXIT_OK


@exit_codes
def cmd_sweep(scenario_path: Optional[str], tasks: str, out_dir: str) -> int:
    counts = parse_task_range(tasks)
    scenario = resolve_scenario(scenario_path)
    device = scenario.device
    specs = scenario.task_specs()

    if len(specs) >= max(counts):
        def factory(n):
            return specs[:n]
    else:
        def factory(n):
            return uniform_task_set(n)

    for sim_mode in (SimMode.SOFTWARE, SimMode.HARDWARE):
        validate_task_set(
            factory(max(counts)), scenario.clock, sim_mode, device.n_slots, device.counter_width_bits
        )

    handlers = handler_timing_table(counts, scenario.clock, scenario.cost, n_slots=device.n_slots)
    latency = latency_sweep(
        counts,
        scenario.clock,
        scenario.cost,
        scenario.duration_ns,
        n_slots=device.n_slots,
        counter_width_bits=device.counter_width_bits,
    )
    improvement = improvement_table(
        counts,
        scenario.clock,
        scenario.cost,
        scenario.duration_ns,
        task_factory=factory,
        n_slots=device.n_slots,
        counter_width_bits=device.counter_width_bits,
    )
    grid = improvement_grid(counts, _grid_periods(scenario), scenario.clock, scenario.cost)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_table_csv(handlers, out / "handler_times.csv")
    write_table_csv(latency, out / "latency_sweep.csv")
    write_table_csv(improvement, out / "improvement.csv")
    write_table_csv(grid, out / "improvement_grid.csv")
    logger.info(f"✓ Sweep tables for n={counts[0]}..{counts[-1]} written to {out}")
    return EXIT_OK


@exit_codes
def cmd_resources(tasks: str, width: int = 64, out_path: Optional[str] = None) -> int:
    counts = parse_task_range(tasks)
    table = resource_table(counts, counter_width_bits=width)
    if out_path is None:
        write_table_csv(table, sys.stdout)
    else:
        write_table_csv(table, out_path)
        logger.info(f"✓ Resource table written to {out_path}")
    return EXIT_OK
