"""
Plot-ready tables: handler timings vs task count, CPU overhead and
improvement factor vs task count/period, FPGA resources vs task count.
"""
import logging
import math
import time
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np
import pandas as pd

from app.core.config import settings
from app.core.errors import ConfigurationError
from app.models.timebase import ns
from app.schemas.clock import ClockMap
from app.schemas.scenario import CostModel, SimMode, TaskSpec
from app.services.bench import (
    NS_PER_S,
    cpu_load_fraction,
    estimate_resources,
    hw_overhead_per_second,
    improvement_factor,
    ledger_overhead_per_second,
    master_tick_op,
    measure,
    sw_overhead_per_second,
    wake_isr_op,
    wakeups_per_second,
)
from app.services.simkit import run_scenario
from app.services.timebase import max_delay_ns, ns_to_cpu_cycles

logger = logging.getLogger(__name__)

HANDLER_COLUMNS = [
    'n_tasks',
    'mode',
    'mean_ns',
    'mean_cpu_cycles',
    'calibration_ns',
    'fit_slope_ns',
    'fit_intercept_ns',
]
IMPROVEMENT_COLUMNS = [
    'n_tasks',
    'wakeups_per_s',
    'sw_overhead_ns_per_s',
    'hw_overhead_ns_per_s',
    'improvement_factor',
    'sw_cpu_load',
    'hw_cpu_load',
]
GRID_COLUMNS = [
    'n_tasks',
    'period_ns',
    'wakeups_per_s',
    'sw_overhead_ns_per_s',
    'hw_overhead_ns_per_s',
    'improvement_factor',
]
RESOURCE_COLUMNS = ['n_tasks', 'flip_flops', 'luts', 'max_delay_ns']


def uniform_task_set(n_tasks: int, period_ns: int = settings.DEFAULT_TASK_PERIOD_NS) -> list[TaskSpec]:
    """n tasks with one common period and no offset: every release batches into one ISR"""
    return [TaskSpec(task_id=f"t{i}", period_ns=period_ns) for i in range(n_tasks)]


def _ratio(sw, hw) -> float:
    # presentation layer: a silent hardware side shows as infinite speedup
    if hw == 0:
        return float("inf")
    return float(improvement_factor(sw, hw))


# ============================================================================
# HANDLER TIMINGS
# ============================================================================

def handler_timing_table(
    task_counts: Sequence[int],
    clk: ClockMap,
    cost: CostModel,
    repetitions: int = settings.REPETITIONS,
    n_slots: int = settings.N_SLOTS,
) -> pd.DataFrame:
    """
    Calibrated mean duration of one master tick over n timers (software) and
    of one wake-up ISR serving n tasks (hardware), with a least-squares line
    per mode. The fit columns stay empty below two task counts.
    """
    rows = []
    for n in task_counts:
        ops = (
            (SimMode.SOFTWARE, master_tick_op(n, cost)),
            (SimMode.HARDWARE, wake_isr_op(n, cost, n_slots)),
        )
        for mode, op in ops:
            result = measure(op, clk, cost, repetitions)
            rows.append({
                'n_tasks': n,
                'mode': mode.value,
                'mean_ns': result.mean_ns,
                'mean_cpu_cycles': ns_to_cpu_cycles(ns(math.ceil(result.mean_ns)), clk),
                'calibration_ns': result.calibration_ns,
            })

    df = pd.DataFrame(rows, columns=HANDLER_COLUMNS)
    df[['fit_slope_ns', 'fit_intercept_ns']] = df[['fit_slope_ns', 'fit_intercept_ns']].astype(float)
    for mode in (SimMode.SOFTWARE, SimMode.HARDWARE):
        mask = df['mode'] == mode.value
        if df.loc[mask, 'n_tasks'].nunique() < 2:
            continue
        slope, intercept = np.polyfit(
            df.loc[mask, 'n_tasks'].astype(float), df.loc[mask, 'mean_ns'].astype(float), 1
        )
        df.loc[mask, 'fit_slope_ns'] = slope
        df.loc[mask, 'fit_intercept_ns'] = intercept
        logger.info(f"{mode.value} handler: {intercept:,.1f} ns + {slope:,.1f} ns per task")
    return df


# ============================================================================
# CPU OVERHEAD / IMPROVEMENT FACTOR
# ============================================================================

def improvement_table(
    task_counts: Sequence[int],
    clk: ClockMap,
    cost: CostModel,
    duration_ns: int,
    task_factory: Callable[[int], list[TaskSpec]] = uniform_task_set,
    n_slots: int = settings.N_SLOTS,
    counter_width_bits: int = 64,
) -> pd.DataFrame:
    """Per-second overhead of both modes, read off simulated traces"""
    rows = []
    total = len(task_counts)
    start_time = time.time()
    logger.info(f"Simulating overhead for {total} task counts")

    for i, n in enumerate(task_counts, 1):
        tasks = task_factory(n)
        sw_trace = run_scenario(
            tasks, clk, cost, SimMode.SOFTWARE, duration_ns, n_slots, counter_width_bits
        )
        hw_trace = run_scenario(
            tasks, clk, cost, SimMode.HARDWARE, duration_ns, n_slots, counter_width_bits
        )
        sw = ledger_overhead_per_second(sw_trace, duration_ns)
        hw = ledger_overhead_per_second(hw_trace, duration_ns)
        rows.append({
            'n_tasks': n,
            'wakeups_per_s': float(wakeups_per_second(hw_trace, duration_ns)),
            'sw_overhead_ns_per_s': float(sw),
            'hw_overhead_ns_per_s': float(hw),
            'improvement_factor': _ratio(sw, hw),
            'sw_cpu_load': float(cpu_load_fraction(sw)),
            'hw_cpu_load': float(cpu_load_fraction(hw)),
        })
        logger.info(f"Progress: {i}/{total} task counts")

    logger.info(f"✓ Overhead table built in {time.time() - start_time:.2f} seconds")
    return pd.DataFrame(rows, columns=IMPROVEMENT_COLUMNS)


def improvement_grid(
    task_counts: Sequence[int],
    periods_ns: Sequence[int],
    clk: ClockMap,
    cost: CostModel,
) -> pd.DataFrame:
    """
    Closed-form improvement factor for n tasks sharing one period, each
    wake-up served by its own ISR invocation.
    """
    if any(period < 1 for period in periods_ns):
        raise ConfigurationError(f"periods must be >= 1 ns: {list(periods_ns)}")
    rows = []
    for n in task_counts:
        sw = sw_overhead_per_second(n, clk, cost)
        for period in periods_ns:
            wakeups = Fraction(n * NS_PER_S, period)
            hw = hw_overhead_per_second(wakeups, None, cost)
            rows.append({
                'n_tasks': n,
                'period_ns': period,
                'wakeups_per_s': float(wakeups),
                'sw_overhead_ns_per_s': float(sw),
                'hw_overhead_ns_per_s': float(hw),
                'improvement_factor': _ratio(sw, hw),
            })
    return pd.DataFrame(rows, columns=GRID_COLUMNS)


# ============================================================================
# FPGA RESOURCES
# ============================================================================

def resource_table(
    task_counts: Sequence[int],
    counter_width_bits: int = 64,
    lut_per_counter_bit: int = 2,
    clk: Optional[ClockMap] = None,
) -> pd.DataFrame:
    """Flip-flops and LUTs per task count, next to the longest delay one counter can hold"""
    clk = ClockMap() if clk is None else clk
    longest = max_delay_ns(counter_width_bits, clk)
    estimates = [
        estimate_resources(n, counter_width_bits, lut_per_counter_bit) for n in task_counts
    ]
    return pd.DataFrame(
        [
            {'n_tasks': e.n_tasks, 'flip_flops': e.flip_flops, 'luts': e.luts, 'max_delay_ns': longest}
            for e in estimates
        ],
        columns=RESOURCE_COLUMNS,
    )
