"""
Evaluation machinery: calibrated timing, per-second CPU overhead of both
time managers, improvement factor, latency sweeps and the FPGA resource model.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import pandas as pd

from app.core.config import settings
from app.core.errors import CapacityError, ConfigurationError, SweepError, UndefinedRatioError
from app.models.timebase import U64_MAX
from app.models.timer_table import SwTimer, SwTimerTable
from app.models.trace import EventKind, EventTrace
from app.schemas.clock import ClockMap
from app.schemas.report import Measurement, ResourceEstimate, RunReport
from app.schemas.scenario import CostModel, SimMode, TaskSpec
from app.services.hwdev import reset
from app.services.simkit import isr_cost, run_scenario, wake_latency
from app.services.swtick import master_tick_cost, sw_master_tick

logger = logging.getLogger(__name__)

NS_PER_S = 10**9


# ============================================================================
# CALIBRATED MEASUREMENT
# ============================================================================

class MeasurementHarness:
    """
    CPU-side clock read through GetTime. Each GetTime costs reg_access_ns,
    so two back-to-back reads differ by exactly that amount.
    """

    def __init__(self, cost: CostModel):
        self.cost = cost
        self.now_ns = 0

    def get_time(self) -> int:
        stamp = self.now_ns
        self.now_ns += self.cost.reg_access_ns
        return stamp

    def spend(self, cost_ns: int) -> None:
        self.now_ns += cost_ns


def calibrate(clk: ClockMap, cost: CostModel) -> int:
    """c1 = GetTime(); c2 = GetTime(); calibration = c2 - c1"""
    harness = MeasurementHarness(cost)
    c1 = harness.get_time()
    c2 = harness.get_time()
    return c2 - c1


def measure(
    op: Callable[[], int],
    clk: ClockMap,
    cost: CostModel,
    repetitions: int = settings.REPETITIONS,
) -> Measurement:
    """
    Time `op` (which returns its modeled cost in ns) between two GetTime
    calls, subtract the calibration value, repeat and average.
    """
    if repetitions < 1:
        raise ConfigurationError(f"repetitions must be >= 1, got {repetitions}")
    calibration = calibrate(clk, cost)
    harness = MeasurementHarness(cost)
    samples = []
    for _ in range(repetitions):
        t1 = harness.get_time()
        harness.spend(op())
        t2 = harness.get_time()
        samples.append((t2 - t1) - calibration)
    return Measurement(
        samples=samples,
        calibration_ns=calibration,
        mean_ns=sum(samples) / len(samples),
    )


def noop_op() -> int:
    return 0


def master_tick_op(n_timers: int, cost: CostModel) -> Callable[[], int]:
    """One master tick over a table of n timers that never expire during the run"""
    table = SwTimerTable(entries=[SwTimer(f"t{i}", U64_MAX) for i in range(n_timers)])
    return lambda: sw_master_tick(table, cost).handler_cost_ns


def wake_isr_op(batch_size: int, cost: CostModel, n_slots: int = settings.N_SLOTS) -> Callable[[], int]:
    """Wake-up ISR servicing `batch_size` slots that expired on the same cycle"""
    if not 1 <= batch_size <= n_slots:
        raise ConfigurationError(f"batch_size must be in 1..{n_slots}, got {batch_size}")

    def op() -> int:
        device = reset(n_slots)
        for slot in range(batch_size):
            device.task_delay(slot, 1)
        device.step_cycles(1)
        woken = sorted(device.get_tasks_to_wake())
        for slot in woken:
            device.clear_task(slot)
        return isr_cost(len(woken), cost)

    return op


# ============================================================================
# CPU OVERHEAD AND IMPROVEMENT FACTOR
# ============================================================================

def sw_overhead_per_second(n_tasks: int, clk: ClockMap, cost: CostModel) -> Fraction:
    """Master tick cost times the number of ticks in one second"""
    return master_tick_cost(n_tasks, cost) * clk.ticks_per_second


def hw_overhead_per_second(
    wakeups_per_s: Union[int, Fraction],
    batch_profile: Optional[Sequence[int]],
    cost: CostModel,
) -> Fraction:
    """
    Sum of ISR costs over one second. Without a batch profile every wake-up
    has its own ISR invocation.
    """
    if wakeups_per_s < 0:
        raise ConfigurationError(f"wakeups_per_s must be >= 0, got {wakeups_per_s}")
    if batch_profile is None:
        return Fraction(wakeups_per_s) * isr_cost(1, cost)
    if any(size < 1 for size in batch_profile):
        raise ConfigurationError(f"ISR batches must wake at least one task: {list(batch_profile)}")
    if sum(batch_profile) != wakeups_per_s:
        raise ConfigurationError(
            f"batch profile wakes {sum(batch_profile)} tasks, expected {wakeups_per_s}"
        )
    return Fraction(sum(isr_cost(size, cost) for size in batch_profile))


def improvement_factor(sw_overhead, hw_overhead) -> Fraction:
    """(CPU overhead in software) / (CPU overhead in hardware)"""
    if hw_overhead == 0:
        raise UndefinedRatioError("hardware overhead is 0; the improvement factor is undefined")
    return Fraction(sw_overhead) / Fraction(hw_overhead)


def cpu_load_fraction(overhead_ns_per_s) -> Fraction:
    return Fraction(overhead_ns_per_s) / NS_PER_S


def ledger_overhead_per_second(trace: EventTrace, duration_ns: int) -> Fraction:
    """Charged time-manager cost in the trace, normalized to one second"""
    return Fraction(trace.total_cost_ns() * NS_PER_S, duration_ns)


def batch_profile(trace: EventTrace, cost: CostModel) -> list[int]:
    """Tasks woken by each ISR invocation, recovered from the ISR costs"""
    if cost.hw_per_wakeup_ns == 0:
        raise ConfigurationError("batch sizes cannot be recovered when hw_per_wakeup_ns is 0")
    return [
        (event.cost_ns - cost.hw_isr_fixed_ns) // cost.hw_per_wakeup_ns
        for event in trace.of_kind(EventKind.ISR_EXIT)
    ]


def wakeups_per_second(trace: EventTrace, duration_ns: int) -> Fraction:
    return Fraction(len(trace.of_kind(EventKind.TASK_WOKEN)) * NS_PER_S, duration_ns)


def mean_latency_ns(trace: EventTrace) -> Optional[float]:
    latencies = []
    for task_id in sorted(trace.task_ids()):
        latencies.extend(wake_latency(trace, task_id))
    if not latencies:
        return None
    return sum(latencies) / len(latencies)


# ============================================================================
# RUN REPORTS
# ============================================================================

def build_run_report(
    trace: EventTrace,
    scenario_id: str,
    mode: Union[SimMode, str],
    n_tasks: int,
    duration_ns: int,
) -> RunReport:
    return RunReport(
        scenario_id=scenario_id,
        mode=SimMode(mode).value,
        n_tasks=n_tasks,
        wakeups_per_s=float(wakeups_per_second(trace, duration_ns)),
        overhead_ns_per_s=float(ledger_overhead_per_second(trace, duration_ns)),
        mean_latency_ns=mean_latency_ns(trace),
    )


def pair_reports(sw_report: RunReport, hw_report: RunReport) -> tuple[RunReport, RunReport]:
    """
    Attach the improvement factor to both reports of one scenario. A silent
    hardware side shows as inf; two silent sides (zero tasks) leave it empty.
    """
    if sw_report.overhead_ns_per_s == 0 and hw_report.overhead_ns_per_s == 0:
        return sw_report, hw_report
    try:
        speedup = float(improvement_factor(sw_report.overhead_ns_per_s, hw_report.overhead_ns_per_s))
    except UndefinedRatioError:
        speedup = float("inf")
    return (
        sw_report.model_copy(update={"speedup": speedup}),
        hw_report.model_copy(update={"speedup": speedup}),
    )


# ============================================================================
# LATENCY SWEEP
# ============================================================================

def staggered_task_set(n_tasks: int, clk: ClockMap) -> list[TaskSpec]:
    """
    n tasks sharing period n*base, offset by one base period each: releases
    land on distinct master ticks, so no two hardware wake-ups coincide.
    """
    period = n_tasks * clk.base_period_ns
    return [
        TaskSpec(task_id=f"t{i}", period_ns=period, initial_offset_ns=i * clk.base_period_ns)
        for i in range(n_tasks)
    ]


def _sweep_point(
    n_tasks: int,
    mode: SimMode,
    tasks: list[TaskSpec],
    clk: ClockMap,
    cost: CostModel,
    duration_ns: int,
    n_slots: int,
    counter_width_bits: int,
) -> dict:
    result = {
        'n_tasks': n_tasks,
        'mode': mode.value,
        'success': False,
        'mean_latency_ns': None,
        'error': None,
        'processing_time': 0,
    }
    start_time = time.time()
    try:
        trace = run_scenario(
            tasks, clk, cost, mode, duration_ns, n_slots=n_slots, counter_width_bits=counter_width_bits
        )
        result['mean_latency_ns'] = mean_latency_ns(trace)
        result['success'] = True
    except Exception as e:
        logger.error(f"✗ Sweep point n={n_tasks} {mode.value}: {e}")
        result['error'] = str(e)
    finally:
        result['processing_time'] = time.time() - start_time
    return result


def latency_sweep(
    task_counts: Sequence[int],
    clk: ClockMap,
    cost: CostModel,
    duration_ns: int,
    n_slots: int = settings.N_SLOTS,
    task_factory: Callable[[int, ClockMap], list[TaskSpec]] = staggered_task_set,
    counter_width_bits: int = 64,
    max_workers: int = settings.MAX_WORKERS,
) -> pd.DataFrame:
    """
    Paired software/hardware runs per task count; mean wake-up latency per
    (n_tasks, mode). Rows come back ordered by n_tasks then mode regardless
    of completion order.
    """
    counts = list(task_counts)
    if counts and max(counts) > n_slots:
        raise CapacityError(
            f"sweep up to {max(counts)} tasks exceeds the {n_slots} slots of the hardware time manager"
        )
    if any(n < 1 for n in counts):
        raise ConfigurationError(f"task counts must be >= 1: {counts}")

    overall_start_time = time.time()
    total = len(counts) * 2
    completed = 0
    logger.info(f"Starting latency sweep over {len(counts)} task counts ({total} runs)")
    logger.info(f"Using {max_workers} parallel workers")

    results = []
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = {
            executor.submit(
                _sweep_point,
                n,
                mode,
                task_factory(n, clk),
                clk,
                cost,
                duration_ns,
                n_slots,
                counter_width_bits,
            ): (n, mode)
            for n in counts
            for mode in (SimMode.SOFTWARE, SimMode.HARDWARE)
        }
        for future in as_completed(futures):
            result = future.result()
            results.append(result)
            completed += 1
            logger.info(f"Progress: {completed}/{total} sweep runs completed")

    failed = [r for r in results if not r['success']]
    if failed:
        raise SweepError(
            f"{len(failed)} sweep runs failed: "
            + "; ".join(f"n={r['n_tasks']} {r['mode']}: {r['error']}" for r in failed)
        )

    mode_order = {SimMode.SOFTWARE.value: 0, SimMode.HARDWARE.value: 1}
    results.sort(key=lambda r: (r['n_tasks'], mode_order[r['mode']]))

    logger.info("=" * 60)
    logger.info("LATENCY SWEEP COMPLETE - SUMMARY")
    logger.info("=" * 60)
    logger.info(f"Runs: {total}")
    logger.info(f"Total processing time: {time.time() - overall_start_time:.2f} seconds")

    return pd.DataFrame(
        [
            {'n_tasks': r['n_tasks'], 'mode': r['mode'], 'mean_latency_ns': r['mean_latency_ns']}
            for r in results
        ],
        columns=['n_tasks', 'mode', 'mean_latency_ns'],
    )


# ============================================================================
# FPGA RESOURCE MODEL
# ============================================================================

def estimate_resources(
    n_tasks: int,
    counter_width_bits: int = 64,
    lut_per_counter_bit: int = 2,
) -> ResourceEstimate:
    """
    Structural count: one system-time counter plus one counter and one
    pending flag per task; each counter bit costs `lut_per_counter_bit` LUTs.
    """
    if n_tasks < 1:
        raise ConfigurationError(f"n_tasks must be >= 1, got {n_tasks}")
    if counter_width_bits < 1:
        raise ConfigurationError(f"counter_width_bits must be >= 1, got {counter_width_bits}")
    if lut_per_counter_bit < 1:
        raise ConfigurationError(f"lut_per_counter_bit must be >= 1, got {lut_per_counter_bit}")
    counters = n_tasks + 1
    return ResourceEstimate(
        n_tasks=n_tasks,
        counter_width_bits=counter_width_bits,
        flip_flops=counter_width_bits * counters + n_tasks,
        luts=lut_per_counter_bit * counter_width_bits * counters,
    )
