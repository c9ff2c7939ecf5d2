from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from app.core.errors import CapacityError, ConfigurationError, SweepError, UndefinedRatioError
from app.schemas.clock import ClockMap
from app.schemas.report import Measurement
from app.schemas.scenario import CostModel, TaskSpec, default_scenario
from app.services.bench import (
    batch_profile,
    build_run_report,
    calibrate,
    cpu_load_fraction,
    estimate_resources,
    hw_overhead_per_second,
    improvement_factor,
    latency_sweep,
    ledger_overhead_per_second,
    master_tick_op,
    measure,
    noop_op,
    pair_reports,
    staggered_task_set,
    sw_overhead_per_second,
    wake_isr_op,
    wakeups_per_second,
)
from app.services.figures import handler_timing_table, improvement_grid, improvement_table, resource_table
from app.services.simkit import run_scenario
from app.services.timebase import max_delay_ns

SECOND = 1_000_000_000
MS = 1_000_000
PRIME_TICKS = [11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53]


def coprime_task_set(n_tasks: int, clk: ClockMap) -> list[TaskSpec]:
    """Pairwise coprime periods in ticks, offsets of a few us: no two wake-ups share an ISR"""
    return [
        TaskSpec(
            task_id=f"t{i}",
            period_ns=PRIME_TICKS[i] * clk.base_period_ns,
            initial_offset_ns=(i + 1) * 1000,
        )
        for i in range(n_tasks)
    ]


# ============================================================================
# CALIBRATED MEASUREMENT
# ============================================================================

def test_calibration_equals_register_access(clk, cost):
    assert calibrate(clk, cost) == 150
    assert calibrate(clk, cost) == calibrate(clk, cost)
    assert calibrate(clk, CostModel(reg_access_ns=0)) == 0


@pytest.mark.parametrize("reg_access_ns", [0, 1, 150, 12_345])
def test_calibration_cancels_for_a_noop(clk, reg_access_ns):
    result = measure(noop_op, clk, CostModel(reg_access_ns=reg_access_ns))
    assert result.mean_ns == 0
    assert result.samples == [0] * 10


def test_measure_master_tick_over_twelve_timers(clk, cost):
    result = measure(master_tick_op(12, cost), clk, cost)
    assert result.mean_ns == 8000
    assert result.calibration_ns == 150
    assert len(result.samples) == 10


def test_measure_wake_isr(clk, cost):
    assert measure(wake_isr_op(1, cost), clk, cost).mean_ns == 3500
    assert measure(wake_isr_op(12, cost), clk, cost).mean_ns == 9000
    with pytest.raises(ConfigurationError):
        wake_isr_op(13, cost)


def test_measure_needs_one_repetition(clk, cost):
    with pytest.raises(ConfigurationError):
        measure(noop_op, clk, cost, repetitions=0)


def test_measurement_schema_checks_mean():
    with pytest.raises(ValueError):
        Measurement(samples=[1, 2], calibration_ns=0, mean_ns=2.0)
    with pytest.raises(ValueError):
        Measurement(samples=[-1], calibration_ns=0, mean_ns=-1.0)


# ============================================================================
# OVERHEAD FORMULAS
# ============================================================================

def test_sw_overhead_per_second(clk, cost):
    assert sw_overhead_per_second(12, clk, cost) == 800_000
    assert sw_overhead_per_second(0, clk, cost) == 200_000
    halved = ClockMap(fpga_freq_hz=clk.fpga_freq_hz, base_period_ns=clk.base_period_ns // 2)
    assert sw_overhead_per_second(12, halved, cost) == 2 * sw_overhead_per_second(12, clk, cost)


def test_hw_overhead_per_second(cost):
    assert hw_overhead_per_second(12, None, cost) == 42_000
    assert hw_overhead_per_second(0, None, cost) == 0
    assert hw_overhead_per_second(12, [12], cost) == 9000
    assert hw_overhead_per_second(12, [4, 8], cost) == 3000 * 2 + 500 * 12
    with pytest.raises(ConfigurationError):
        hw_overhead_per_second(12, [5], cost)
    with pytest.raises(ConfigurationError):
        hw_overhead_per_second(-1, None, cost)


def test_improvement_factor_examples(clk, cost):
    twelve_slow = improvement_factor(
        sw_overhead_per_second(12, clk, cost), hw_overhead_per_second(12, None, cost)
    )
    assert twelve_slow == Fraction(400, 21)
    assert float(twelve_slow) == pytest.approx(19.05, abs=0.005)
    assert twelve_slow > 10

    one_fast = improvement_factor(
        sw_overhead_per_second(1, clk, cost), hw_overhead_per_second(100, None, cost)
    )
    assert one_fast == Fraction(250_000, 350_000)
    assert one_fast < 1

    assert improvement_factor(42, 42) == 1
    with pytest.raises(UndefinedRatioError):
        improvement_factor(800_000, 0)


def test_improvement_factor_monotone_over_grid(clk, cost):
    counts = range(0, 13)
    wakeups = [1, 2, 5, 12, 50, 100, 1200]
    for n in counts:
        factors = [
            improvement_factor(sw_overhead_per_second(n, clk, cost), hw_overhead_per_second(w, None, cost))
            for w in wakeups
        ]
        assert all(a >= b for a, b in zip(factors, factors[1:]))
    for w in wakeups:
        factors = [
            improvement_factor(sw_overhead_per_second(n, clk, cost), hw_overhead_per_second(w, None, cost))
            for n in counts
        ]
        assert all(a <= b for a, b in zip(factors, factors[1:]))


def test_cpu_load_fraction():
    assert cpu_load_fraction(800_000) == Fraction(8, 10_000)
    assert cpu_load_fraction(0) == 0


# ============================================================================
# ANALYTIC FORMULAS VS SIMULATION LEDGER
# ============================================================================

def test_ledger_matches_formulas_for_default_scenario(clk, cost):
    tasks = default_scenario().task_specs()
    sw = run_scenario(tasks, clk, cost, "software", SECOND)
    hw = run_scenario(tasks, clk, cost, "hardware", SECOND)

    assert ledger_overhead_per_second(sw, SECOND) == sw_overhead_per_second(12, clk, cost)
    assert wakeups_per_second(hw, SECOND) == 12
    assert batch_profile(hw, cost) == [12]
    hw_formula = hw_overhead_per_second(12, batch_profile(hw, cost), cost)
    assert ledger_overhead_per_second(hw, SECOND) == hw_formula == 9000

    factor = improvement_factor(ledger_overhead_per_second(sw, SECOND), ledger_overhead_per_second(hw, SECOND))
    assert factor == improvement_factor(sw_overhead_per_second(12, clk, cost), hw_formula)
    assert factor >= 10


def test_ledger_matches_formulas_for_fast_task(clk, cost):
    tasks = [TaskSpec(task_id="t0", period_ns=10 * MS)]
    sw = run_scenario(tasks, clk, cost, "software", SECOND)
    hw = run_scenario(tasks, clk, cost, "hardware", SECOND)
    assert ledger_overhead_per_second(sw, SECOND) == 250_000
    assert ledger_overhead_per_second(hw, SECOND) == hw_overhead_per_second(100, None, cost) == 350_000
    assert improvement_factor(
        ledger_overhead_per_second(sw, SECOND), ledger_overhead_per_second(hw, SECOND)
    ) < 1


def test_batch_profile_needs_per_wakeup_cost(clk):
    with pytest.raises(ConfigurationError):
        batch_profile(run_scenario([], clk, CostModel(), "hardware", SECOND), CostModel(hw_per_wakeup_ns=0))


# ============================================================================
# RUN REPORTS
# ============================================================================

def test_run_reports_for_default_scenario(clk, cost):
    tasks = default_scenario().task_specs()
    sw = build_run_report(run_scenario(tasks, clk, cost, "software", SECOND), "default", "software", 12, SECOND)
    hw = build_run_report(run_scenario(tasks, clk, cost, "hardware", SECOND), "default", "hardware", 12, SECOND)
    assert sw.overhead_ns_per_s == 800_000
    assert sw.wakeups_per_s == 12
    assert sw.mean_latency_ns == 8000
    assert hw.overhead_ns_per_s == 9000
    assert hw.mean_latency_ns == 6250
    assert sw.speedup is None and hw.speedup is None

    sw, hw = pair_reports(sw, hw)
    assert sw.speedup == hw.speedup == pytest.approx(800_000 / 9000)


def test_pair_reports_with_silent_hardware(clk, cost):
    # periods longer than the run: ticks are charged, nothing ever wakes
    tasks = [TaskSpec(task_id="t0", period_ns=2 * SECOND), TaskSpec(task_id="t1", period_ns=3 * SECOND)]
    sw = build_run_report(run_scenario(tasks, clk, cost, "software", SECOND), "s", "software", 2, SECOND)
    hw = build_run_report(run_scenario(tasks, clk, cost, "hardware", SECOND), "s", "hardware", 2, SECOND)
    assert sw.overhead_ns_per_s == 300_000
    assert hw.overhead_ns_per_s == 0
    sw, hw = pair_reports(sw, hw)
    assert sw.speedup == float("inf")
    assert hw.speedup == float("inf")


def test_pair_reports_without_tasks(clk, cost):
    sw = build_run_report(run_scenario([], clk, cost, "software", SECOND), "idle", "software", 0, SECOND)
    hw = build_run_report(run_scenario([], clk, cost, "hardware", SECOND), "idle", "hardware", 0, SECOND)
    assert sw.overhead_ns_per_s == hw.overhead_ns_per_s == 0
    sw, hw = pair_reports(sw, hw)
    assert sw.speedup is None
    assert hw.speedup is None


# ============================================================================
# LATENCY SWEEP
# ============================================================================

def test_latency_sweep_shape(clk, cost):
    table = latency_sweep(range(1, 13), clk, cost, SECOND, max_workers=4)
    assert len(table) == 24
    assert list(table.columns) == ["n_tasks", "mode", "mean_latency_ns"]
    assert list(table["n_tasks"]) == [n for n in range(1, 13) for _ in range(2)]
    assert list(table["mode"]) == ["software", "hardware"] * 12

    software = table[table["mode"] == "software"]
    slope, _ = np.polyfit(software["n_tasks"], software["mean_latency_ns"], 1)
    assert slope == pytest.approx(cost.sw_per_timer_ns, rel=1e-9)


def test_latency_sweep_single_count(clk, cost):
    table = latency_sweep([1], clk, cost, SECOND)
    assert list(table["mode"]) == ["software", "hardware"]


def test_hardware_latency_flat_with_coprime_periods(clk, cost):
    table = latency_sweep(range(1, 13), clk, cost, SECOND, task_factory=coprime_task_set)
    hardware = table[table["mode"] == "hardware"]["mean_latency_ns"]
    assert hardware.max() - hardware.min() < cost.hw_per_wakeup_ns


def test_latency_sweep_capacity(clk, cost):
    with pytest.raises(CapacityError):
        latency_sweep(range(1, 14), clk, cost, SECOND, n_slots=12)
    with pytest.raises(ConfigurationError):
        latency_sweep([0, 1], clk, cost, SECOND)


def test_latency_sweep_failed_runs(clk, cost):
    def too_fast(n_tasks, clk):
        return [TaskSpec(task_id=f"t{i}", period_ns=MS) for i in range(n_tasks)]

    with pytest.raises(SweepError, match="2 sweep runs failed"):
        latency_sweep([1, 2], clk, cost, SECOND, task_factory=too_fast)


def test_latency_sweep_honours_counter_width(clk, cost):
    # the latest first release (30 ms, 3,060,000 cycles) fits 22 bits; 16 bits hold under 1 ms
    assert len(latency_sweep([1, 2], clk, cost, SECOND, counter_width_bits=22)) == 4
    with pytest.raises(SweepError, match="2 sweep runs failed"):
        latency_sweep([1, 2], clk, cost, SECOND, counter_width_bits=16)


def test_staggered_task_set(clk):
    tasks = staggered_task_set(3, clk)
    assert [t.period_ns for t in tasks] == [30 * MS] * 3
    assert [t.initial_offset_ns for t in tasks] == [0, 10 * MS, 20 * MS]


# ============================================================================
# FIGURE TABLES
# ============================================================================

def test_improvement_table_from_simulation(clk, cost):
    table = improvement_table([1, 12], clk, cost, SECOND)
    assert list(table["sw_overhead_ns_per_s"]) == [250_000.0, 800_000.0]
    assert list(table["hw_overhead_ns_per_s"]) == [3500.0, 9000.0]
    assert list(table["wakeups_per_s"]) == [1.0, 12.0]
    assert table["improvement_factor"].iloc[1] >= 10


def test_improvement_grid(clk, cost):
    grid = improvement_grid([1, 12], [10 * MS, SECOND], clk, cost)
    assert len(grid) == 4
    row = grid[(grid["n_tasks"] == 12) & (grid["period_ns"] == SECOND)].iloc[0]
    assert row["improvement_factor"] == pytest.approx(400 / 21)
    row = grid[(grid["n_tasks"] == 1) & (grid["period_ns"] == 10 * MS)].iloc[0]
    assert row["improvement_factor"] == pytest.approx(5 / 7)
    with pytest.raises(ConfigurationError):
        improvement_grid([1], [0], clk, cost)


def test_improvement_table_cpu_load(clk, cost):
    table = improvement_table([1, 12], clk, cost, SECOND)
    assert list(table["sw_cpu_load"]) == pytest.approx([0.00025, 0.0008])
    assert list(table["hw_cpu_load"]) == pytest.approx([0.0000035, 0.000009])


def test_handler_timing_table(clk, cost):
    table = handler_timing_table(range(1, 13), clk, cost)
    assert list(table["mode"]) == ["software", "hardware"] * 12

    software = table[table["mode"] == "software"]
    hardware = table[table["mode"] == "hardware"]
    assert list(software["mean_ns"]) == [2000 + 500 * n for n in range(1, 13)]
    assert list(hardware["mean_ns"]) == [3000 + 500 * n for n in range(1, 13)]
    assert (table["calibration_ns"] == 150).all()
    assert software["mean_cpu_cycles"].iloc[-1] == 3200

    assert software["fit_slope_ns"].iloc[0] == pytest.approx(cost.sw_per_timer_ns)
    assert software["fit_intercept_ns"].iloc[0] == pytest.approx(cost.sw_fixed_ns)
    assert hardware["fit_slope_ns"].iloc[0] == pytest.approx(cost.hw_per_wakeup_ns)
    assert hardware["fit_intercept_ns"].iloc[0] == pytest.approx(cost.hw_isr_fixed_ns)


def test_handler_timing_table_single_count_has_no_fit(clk, cost):
    table = handler_timing_table([3], clk, cost)
    assert len(table) == 2
    assert table["fit_slope_ns"].isna().all()
    assert table["fit_intercept_ns"].isna().all()


# ============================================================================
# RESOURCE MODEL
# ============================================================================

def test_resource_examples():
    one = estimate_resources(1, 64)
    assert (one.flip_flops, one.luts) == (129, 256)
    assert estimate_resources(12, 64).flip_flops == 844
    assert estimate_resources(1, 1).flip_flops == 3
    assert estimate_resources(12, 32).flip_flops - 12 == (estimate_resources(12, 64).flip_flops - 12) // 2


def test_resource_closed_form_and_monotonicity():
    for width in (16, 32, 64):
        previous = None
        for n in range(1, 13):
            estimate = estimate_resources(n, width)
            assert estimate.flip_flops == width * (n + 1) + n
            assert estimate.luts == 2 * width * (n + 1)
            if previous is not None:
                assert estimate.flip_flops > previous.flip_flops
                assert estimate.luts > previous.luts
            previous = estimate
    for n in range(1, 13):
        assert estimate_resources(n, 16).flip_flops < estimate_resources(n, 32).flip_flops
        assert estimate_resources(n, 32).luts < estimate_resources(n, 64).luts


@pytest.mark.parametrize("n_tasks, width", [(0, 64), (1, 0)])
def test_resource_invalid_inputs(n_tasks, width):
    with pytest.raises(ConfigurationError):
        estimate_resources(n_tasks, width)


def test_resource_table(clk):
    table = resource_table(range(1, 13), counter_width_bits=64, clk=clk)
    assert list(table.columns) == ["n_tasks", "flip_flops", "luts", "max_delay_ns"]
    assert (table["max_delay_ns"] == max_delay_ns(64, clk)).all()
    assert table["flip_flops"].iloc[0] == 129
    assert table["flip_flops"].iloc[-1] == 844


def test_resource_table_trades_range_for_width(clk):
    narrow = resource_table([12], counter_width_bits=32, clk=clk).iloc[0]
    wide = resource_table([12], counter_width_bits=64, clk=clk).iloc[0]
    assert narrow["max_delay_ns"] == 42_107_522_500
    assert narrow["flip_flops"] < wide["flip_flops"]
    assert narrow["max_delay_ns"] < wide["max_delay_ns"]
    with pytest.raises(ConfigurationError):
        resource_table([1], counter_width_bits=65, clk=clk)
