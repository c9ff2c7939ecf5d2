import enum
from dataclasses import dataclass


@dataclass(frozen=True)
class SlotState:
    remaining: int  # fpga cycles left; 0 once expired or never loaded
    active: bool


@dataclass(frozen=True)
class DeviceState:
    """Observable state of the hardware time manager at one instant"""

    system_time: int
    slots: tuple[SlotState, ...]
    pending: frozenset[int]
    irq_line: bool

    @property
    def n_slots(self) -> int:
        return len(self.slots)


class Access(enum.Enum):
    RO = "R"
    WO = "W"
    RW = "R/W"


class RegisterMap(enum.IntEnum):
    """32-bit register offsets of the time manager"""

    REG_TIME_LO = 0x00
    REG_TIME_HI = 0x04
    REG_DELAY_SLOT = 0x08
    REG_DELAY_LO = 0x0C
    REG_DELAY_HI = 0x10
    REG_WAKE_MASK = 0x14
    REG_ACK = 0x18


@dataclass(frozen=True)
class RegisterInfo:
    offset: int
    name: str
    width: int
    access: Access
    semantics: str


REGISTER_DATASHEET: tuple[RegisterInfo, ...] = (
    RegisterInfo(
        RegisterMap.REG_TIME_LO, "TIME_LO", 32, Access.RW,
        "R: system_time[31:0], latches system_time[63:32] for the next TIME_HI read. "
        "W: stages the low word of a SetTime.",
    ),
    RegisterInfo(
        RegisterMap.REG_TIME_HI, "TIME_HI", 32, Access.RW,
        "R: latched system_time[63:32] (requires a prior TIME_LO read). "
        "W: commits SetTime with the staged low word.",
    ),
    RegisterInfo(
        RegisterMap.REG_DELAY_SLOT, "DELAY_SLOT", 32, Access.WO,
        "Stages the slot index of the next TaskDelay.",
    ),
    RegisterInfo(
        RegisterMap.REG_DELAY_LO, "DELAY_LO", 32, Access.WO,
        "Stages delay[31:0] (fpga cycles).",
    ),
    RegisterInfo(
        RegisterMap.REG_DELAY_HI, "DELAY_HI", 32, Access.WO,
        "delay[63:32]; commits TaskDelay(slot, delay). Requires DELAY_SLOT and DELAY_LO.",
    ),
    RegisterInfo(
        RegisterMap.REG_WAKE_MASK, "WAKE_MASK", 32, Access.RO,
        "Pending wakes, bit i = slot i. Reading does not acknowledge.",
    ),
    RegisterInfo(
        RegisterMap.REG_ACK, "ACK", 32, Access.WO,
        "Writing i acknowledges (ClearTask) slot i.",
    ),
)

DATASHEET_BY_OFFSET = {info.offset: info for info in REGISTER_DATASHEET}
