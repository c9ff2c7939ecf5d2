import enum
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.core.config import settings
from app.schemas.clock import ClockMap


class SimMode(str, enum.Enum):
    SOFTWARE = "software"
    HARDWARE = "hardware"


class CostModel(BaseModel):
    """
    Execution cost of the time-manager paths, in ns.
    Defaults are placeholders that reproduce the qualitative claims; calibrate them.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    sw_fixed_ns: int = Field(settings.SW_FIXED_NS, ge=0, description="Master tick handler, fixed part")
    sw_per_timer_ns: int = Field(settings.SW_PER_TIMER_NS, ge=0, description="Per delayed-task timer walked")
    hw_isr_fixed_ns: int = Field(settings.HW_ISR_FIXED_NS, ge=0, description="Wake-up ISR, fixed part")
    hw_per_wakeup_ns: int = Field(settings.HW_PER_WAKEUP_NS, ge=0, description="Per task woken by the ISR")
    reg_access_ns: int = Field(settings.REG_ACCESS_NS, ge=0, description="One GetTime register access")


class TaskSpec(BaseModel):
    """Static parameters of a periodic task (SetPeriodic)"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    task_id: str = Field(..., min_length=1, description="Task identifier")
    period_ns: int = Field(..., ge=1, description="Period (ns)")
    initial_offset_ns: int = Field(0, ge=0, description="Offset of the release grid (ns)")


class TaskEntry(BaseModel):
    """Task as written in a scenario file"""

    model_config = ConfigDict(extra="forbid")

    id: str = Field(..., min_length=1)
    period_ns: int = Field(..., ge=1)
    offset_ns: int = Field(0, ge=0)

    def to_spec(self) -> TaskSpec:
        return TaskSpec(task_id=self.id, period_ns=self.period_ns, initial_offset_ns=self.offset_ns)


class DeviceConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_slots: int = Field(settings.N_SLOTS, ge=1, description="Waiting-task counters")
    counter_width_bits: int = Field(settings.COUNTER_WIDTH_BITS, ge=1, le=64, description="Counter width")


class ScenarioFile(BaseModel):
    """A complete experiment description (TOML document)"""

    model_config = ConfigDict(extra="forbid")

    scenario_id: str = Field("default", min_length=1)
    mode: Literal["software", "hardware", "both"] = "both"
    duration_ns: int = Field(settings.DEFAULT_DURATION_NS, ge=1)
    seed: int | None = Field(None, description="Reserved; the simulator is deterministic")
    clock: ClockMap = Field(default_factory=ClockMap)
    cost: CostModel = Field(default_factory=CostModel)
    device: DeviceConfig = Field(default_factory=DeviceConfig)
    tasks: list[TaskEntry] = Field(default_factory=list)

    @field_validator("tasks")
    @classmethod
    def _unique_ids(cls, tasks: list[TaskEntry]) -> list[TaskEntry]:
        seen = set()
        for task in tasks:
            if task.id in seen:
                raise ValueError(f"duplicate task id {task.id!r}")
            seen.add(task.id)
        return tasks

    @property
    def modes(self) -> list[SimMode]:
        if self.mode == "both":
            return [SimMode.SOFTWARE, SimMode.HARDWARE]
        return [SimMode(self.mode)]

    def task_specs(self) -> list[TaskSpec]:
        return [task.to_spec() for task in self.tasks]


def default_scenario(n_tasks: int | None = None) -> ScenarioFile:
    """Evaluation-board experiment: 12 tasks, common 1 s period, both modes, 1 s window"""
    count = settings.N_SLOTS if n_tasks is None else n_tasks
    return ScenarioFile(
        scenario_id="default",
        tasks=[
            TaskEntry(id=f"t{i}", period_ns=settings.DEFAULT_TASK_PERIOD_NS)
            for i in range(count)
        ],
    )
