import enum
from dataclasses import dataclass, field
from typing import Iterator, Optional

from app.schemas.scenario import TaskSpec


class EventKind(enum.Enum):
    RELEASE_DUE = "release_due"
    MASTER_TICK = "master_tick"
    IRQ_RAISED = "irq_raised"
    ISR_ENTER = "isr_enter"
    ACK_SENT = "ack_sent"
    TASK_WOKEN = "task_woken"
    ISR_EXIT = "isr_exit"


# tie-break for events sharing a timestamp
KIND_RANK = {kind: rank for rank, kind in enumerate(EventKind)}


@dataclass(frozen=True)
class TraceEvent:
    timestamp_ns: int
    kind: EventKind
    task_id: Optional[str] = None
    cost_ns: Optional[int] = None


@dataclass
class EventTrace:
    """Simulation output; ordered by timestamp once `finalize` ran"""

    events: list[TraceEvent] = field(default_factory=list)

    def record(
        self,
        timestamp_ns: int,
        kind: EventKind,
        task_id: Optional[str] = None,
        cost_ns: Optional[int] = None,
    ) -> None:
        self.events.append(TraceEvent(timestamp_ns, kind, task_id, cost_ns))

    def finalize(self) -> "EventTrace":
        # stable: equal (timestamp, kind) keep recording order
        self.events.sort(key=lambda e: (e.timestamp_ns, KIND_RANK[e.kind]))
        return self

    def of_kind(self, kind: EventKind) -> list[TraceEvent]:
        return [e for e in self.events if e.kind is kind]

    def for_task(self, task_id: str) -> list[TraceEvent]:
        return [e for e in self.events if e.task_id == task_id]

    def task_ids(self) -> set[str]:
        return {e.task_id for e in self.events if e.task_id is not None}

    def total_cost_ns(self) -> int:
        return sum(e.cost_ns for e in self.events if e.cost_ns is not None)

    def __iter__(self) -> Iterator[TraceEvent]:
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)


class TaskState(enum.Enum):
    READY = "ready"
    WAITING = "waiting"


@dataclass
class TaskRuntime:
    """Dynamic state of one periodic task during a run"""

    spec: TaskSpec
    state: TaskState = TaskState.READY
    release_index: int = 0  # index k of the release currently waited for
    next_release_ns: int = 0
    slot: Optional[int] = None  # hardware mode only

    @property
    def task_id(self) -> str:
        return self.spec.task_id

    def release_ns(self, k: int) -> int:
        return self.spec.initial_offset_ns + k * self.spec.period_ns
