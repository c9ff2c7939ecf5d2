from dataclasses import dataclass, field


@dataclass
class SwTimer:
    task_id: str
    remaining_ticks: int


@dataclass
class SwTimerTable:
    """Flat list of delayed-task timers walked in full on every master tick"""

    jiffies: int = 0
    entries: list[SwTimer] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, task_id: str) -> bool:
        return any(entry.task_id == task_id for entry in self.entries)
