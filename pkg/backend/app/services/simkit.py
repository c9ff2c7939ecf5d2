"""
Discrete-event simulation of periodic tasks on either time manager.

software: tasks wait on the master-tick timer list (SwTimerTable)
hardware: tasks load a waiting-task counter of the device; expiries raise the
          irq and the wake-up ISR reads WAKE_MASK, acks and wakes every task.

CPU costs are bookkeeping: they shift the recorded wake/exit timestamps and
feed the overhead ledger, they never delay the device or the tick.
"""
import logging
from typing import Optional, Sequence, Union

import simpy

from app.core.config import settings
from app.core.errors import CapacityError, ConfigurationError, TimeOverflowError, UnknownTaskError
from app.models.timebase import fpga_cycles, master_ticks, ns
from app.models.timer_table import SwTimerTable
from app.models.trace import EventKind, EventTrace, TaskRuntime, TaskState
from app.schemas.clock import ClockMap
from app.schemas.scenario import CostModel, SimMode, TaskSpec
from app.services.hwdev import DeviceEngine, RegisterFile, TimeManagerDriver, reset
from app.services.swtick import sw_add_timer, sw_master_tick
from app.services.timebase import fpga_cycles_to_ns, ns_to_fpga_cycles, ns_to_master_ticks

logger = logging.getLogger(__name__)

REGISTER_SLOT_LIMIT = 32


def isr_cost(n_wakeups: int, cost: CostModel) -> int:
    return cost.hw_isr_fixed_ns + cost.hw_per_wakeup_ns * n_wakeups


def release_count(spec: TaskSpec, duration_ns: int) -> int:
    """Releases offset + k*period (k >= 1) that fall at or before duration_ns"""
    span = duration_ns - spec.initial_offset_ns
    return max(0, span // spec.period_ns)


def validate_task_set(
    tasks: Sequence[TaskSpec],
    clk: ClockMap,
    mode: Union[SimMode, str],
    n_slots: int = settings.N_SLOTS,
    counter_width_bits: int = 64,
) -> None:
    """Every precondition of run_scenario, checked before anything runs"""
    mode = SimMode(mode)
    ids = [task.task_id for task in tasks]
    if len(ids) != len(set(ids)):
        raise ConfigurationError(f"task ids must be unique: {ids}")

    if mode is SimMode.SOFTWARE:
        for task in tasks:
            if task.period_ns < clk.base_period_ns:
                raise ConfigurationError(
                    f"task {task.task_id}: period_ns={task.period_ns} is shorter than the "
                    f"{clk.base_period_ns} ns master tick"
                )
        return

    if len(tasks) > n_slots:
        raise CapacityError(
            f"{len(tasks)} tasks exceed the {n_slots} slots of the hardware time manager"
        )
    if n_slots > REGISTER_SLOT_LIMIT:
        raise ConfigurationError(f"n_slots={n_slots} exceeds the 32-bit WAKE_MASK register")
    top = (1 << counter_width_bits) - 1
    for task in tasks:
        if task.period_ns * clk.fpga_freq_hz < 10**9:
            raise ConfigurationError(
                f"task {task.task_id}: period_ns={task.period_ns} is shorter than one FPGA cycle"
            )
        first = ns_to_fpga_cycles(ns(task.initial_offset_ns + task.period_ns), clk).value
        if first > top:
            raise TimeOverflowError(
                f"task {task.task_id}: first delay of {first} cycles does not fit in "
                f"{counter_width_bits}-bit counters"
            )


# ============================================================================
# SIMULATION ENGINE
# ============================================================================

class ScenarioEngine:
    """One run of one task set in one mode; use `run_scenario`"""

    def __init__(
        self,
        tasks: Sequence[TaskSpec],
        clk: ClockMap,
        cost: CostModel,
        mode: SimMode,
        duration_ns: int,
        n_slots: int,
        counter_width_bits: int,
        engine: DeviceEngine,
    ):
        self.clk = clk
        self.cost = cost
        self.mode = mode
        self.duration_ns = duration_ns
        self.n_slots = n_slots
        self.counter_width_bits = counter_width_bits
        self.engine = engine

        self.env = simpy.Environment()
        self.trace = EventTrace()
        hardware = mode is SimMode.HARDWARE
        # static binding: slot i <-> i-th task
        self.tasks = [
            TaskRuntime(spec=spec, slot=i if hardware else None) for i, spec in enumerate(tasks)
        ]
        self._by_id = {rt.task_id: rt for rt in self.tasks}
        self._by_slot = {rt.slot: rt for rt in self.tasks if rt.slot is not None}
        self._releases = {rt.task_id: release_count(rt.spec, duration_ns) for rt in self.tasks}

    def run(self) -> EventTrace:
        for rt in self.tasks:
            self.env.process(self._release_process(rt))
        if self.mode is SimMode.SOFTWARE:
            self.env.process(self._software_process())
        else:
            self.env.process(self._hardware_process())
        self.env.run()
        return self.trace.finalize()

    def _in_window(self, rt: TaskRuntime) -> bool:
        return rt.release_index <= self._releases[rt.task_id]

    def _last_release_ns(self) -> list[int]:
        return [
            rt.release_ns(self._releases[rt.task_id])
            for rt in self.tasks
            if self._releases[rt.task_id] > 0
        ]

    def _release_process(self, rt: TaskRuntime):
        for k in range(1, self._releases[rt.task_id] + 1):
            due = rt.release_ns(k)
            yield self.env.timeout(due - self.env.now)
            self.trace.record(due, EventKind.RELEASE_DUE, rt.task_id)

    # --- software mode -------------------------------------------------------

    def _software_process(self):
        table = SwTimerTable()
        for rt in self.tasks:
            self._arm_software(rt, table)

        base = self.clk.base_period_ns
        horizon = self.duration_ns // base
        for last in self._last_release_ns():
            horizon = max(horizon, ns_to_master_ticks(ns(last), self.clk).value)

        for j in range(1, horizon + 1):
            yield self.env.timeout(j * base - self.env.now)
            now = self.env.now
            result = sw_master_tick(table, self.cost)
            self.trace.record(now, EventKind.MASTER_TICK, cost_ns=result.handler_cost_ns)
            for task_id in result.expired:
                rt = self._by_id[task_id]
                rt.state = TaskState.READY
                if self._in_window(rt):
                    self.trace.record(now + result.handler_cost_ns, EventKind.TASK_WOKEN, task_id)
                self._arm_software(rt, table)

    def _arm_software(self, rt: TaskRuntime, table: SwTimerTable) -> None:
        """wait_period(): timer up to the tick covering the next release"""
        rt.release_index += 1
        rt.next_release_ns = rt.release_ns(rt.release_index)
        target = ns_to_master_ticks(ns(rt.next_release_ns), self.clk).value
        sw_add_timer(table, rt.task_id, master_ticks(target - table.jiffies))
        rt.state = TaskState.WAITING

    # --- hardware mode -------------------------------------------------------

    def _hardware_process(self):
        device = reset(self.n_slots, self.engine, self.counter_width_bits)
        driver = TimeManagerDriver(RegisterFile(device))
        for rt in self.tasks:
            self._arm_hardware(rt, driver, device.elapsed_cycles)

        last = self._last_release_ns()
        if not last:
            return
        horizon = max(ns_to_fpga_cycles(ns(r), self.clk).value for r in last)

        while True:
            delta = device.cycles_until_next_expiry()
            if delta is None or device.elapsed_cycles + delta > horizon:
                break
            t_irq = fpga_cycles_to_ns(fpga_cycles(device.elapsed_cycles + delta), self.clk).value
            yield self.env.timeout(t_irq - self.env.now)
            device.step_cycles(delta)
            self._wake_up_isr(driver, device.elapsed_cycles, t_irq)

    def _wake_up_isr(self, driver: TimeManagerDriver, elapsed: int, t_irq: int) -> None:
        """Retrieve the task(s) to wake, ack each one, put it in the ready state"""
        self.trace.record(t_irq, EventKind.IRQ_RAISED)
        self.trace.record(t_irq, EventKind.ISR_ENTER)
        slots = driver.get_tasks_to_wake()
        offset = self.cost.hw_isr_fixed_ns
        for slot in slots:
            rt = self._by_slot[slot]
            offset += self.cost.hw_per_wakeup_ns
            driver.clear_task(slot)
            self.trace.record(t_irq + offset, EventKind.ACK_SENT, rt.task_id)
            rt.state = TaskState.READY
            if self._in_window(rt):
                self.trace.record(t_irq + offset, EventKind.TASK_WOKEN, rt.task_id)
            self._arm_hardware(rt, driver, elapsed)
        total = isr_cost(len(slots), self.cost)
        self.trace.record(t_irq + total, EventKind.ISR_EXIT, cost_ns=total)

    def _arm_hardware(self, rt: TaskRuntime, driver: TimeManagerDriver, elapsed: int) -> None:
        """Modified wait_period(): load the task's counter up to the next release"""
        rt.release_index += 1
        rt.next_release_ns = rt.release_ns(rt.release_index)
        target = ns_to_fpga_cycles(ns(rt.next_release_ns), self.clk).value
        driver.task_delay(rt.slot, target - elapsed)
        rt.state = TaskState.WAITING


def run_scenario(
    tasks: Sequence[TaskSpec],
    clk: ClockMap,
    cost: CostModel,
    mode: Union[SimMode, str],
    duration_ns: int,
    n_slots: Optional[int] = None,
    counter_width_bits: int = 64,
    engine: DeviceEngine = "event",
) -> EventTrace:
    """Simulate every periodic release in (0, duration_ns] and return the event trace"""
    mode = SimMode(mode)
    n_slots = settings.N_SLOTS if n_slots is None else n_slots
    if duration_ns < 1:
        raise ConfigurationError(f"duration_ns must be >= 1, got {duration_ns}")
    validate_task_set(tasks, clk, mode, n_slots, counter_width_bits)
    if not tasks:
        return EventTrace()

    logger.info(f"Running {mode.value} scenario: {len(tasks)} tasks over {duration_ns:,} ns")
    trace = ScenarioEngine(
        tasks, clk, cost, mode, duration_ns, n_slots, counter_width_bits, engine
    ).run()
    wakes = len(trace.of_kind(EventKind.TASK_WOKEN))
    logger.info(f"✓ {mode.value}: {len(trace)} events, {wakes} wake-ups")
    return trace


def wake_latency(trace: EventTrace, task_id: str) -> list[int]:
    """Per release: task_woken timestamp minus release_due timestamp"""
    events = trace.for_task(task_id)
    if not events:
        raise UnknownTaskError(f"task {task_id!r} does not appear in the trace")
    releases = [e.timestamp_ns for e in events if e.kind is EventKind.RELEASE_DUE]
    wakes = [e.timestamp_ns for e in events if e.kind is EventKind.TASK_WOKEN]
    return [woken - due for due, woken in zip(releases, wakes)]
