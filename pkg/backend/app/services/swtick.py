"""
Baseline software time manager: a master handler runs every base period,
increments jiffies and walks every delayed-task timer (cost linear in timers).
"""
import logging
from dataclasses import dataclass

from app.core.errors import DuplicateTimerError, InvalidDelayError
from app.models.timebase import U64_MAX, Duration, TimeUnit
from app.models.timer_table import SwTimer, SwTimerTable
from app.schemas.scenario import CostModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TickResult:
    expired: list[str]  # in table order
    handler_cost_ns: int
    timers_walked: int


def sw_add_timer(tbl: SwTimerTable, task_id: str, ticks) -> SwTimerTable:
    """SetPeriodic/wait_period: start a timer for the calling task"""
    if isinstance(ticks, Duration):
        if ticks.unit is not TimeUnit.MASTER_TICK:
            raise TypeError(f"software timers count master ticks, got {ticks.unit.value}")
        ticks = ticks.value
    if ticks < 1:
        raise InvalidDelayError(f"timer for {task_id!r} needs at least 1 tick, got {ticks}")
    if task_id in tbl:
        raise DuplicateTimerError(f"task {task_id!r} already has a running timer")
    tbl.entries.append(SwTimer(task_id=task_id, remaining_ticks=ticks))
    return tbl


def sw_master_tick(tbl: SwTimerTable, cost: CostModel) -> TickResult:
    """
    One master tick: decrement every timer, then collect those that reached 0.
    The cost is returned, not consumed; the simulation engine books it.
    """
    tbl.jiffies = (tbl.jiffies + 1) & U64_MAX
    walked = len(tbl.entries)
    expired = []
    for entry in tbl.entries:
        entry.remaining_ticks -= 1
        if entry.remaining_ticks == 0:
            expired.append(entry.task_id)
    if expired:
        tbl.entries = [entry for entry in tbl.entries if entry.remaining_ticks > 0]
        logger.debug(f"jiffies={tbl.jiffies}: expired {expired}")
    handler_cost_ns = master_tick_cost(walked, cost)
    return TickResult(expired=expired, handler_cost_ns=handler_cost_ns, timers_walked=walked)


def master_tick_cost(timers_walked: int, cost: CostModel) -> int:
    return cost.sw_fixed_ns + cost.sw_per_timer_ns * timers_walked
