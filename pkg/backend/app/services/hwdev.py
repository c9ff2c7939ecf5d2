"""
Behavioral model of the hardware time manager.

Two engines share one contract:
- CycleSteppedDevice: advances one FPGA cycle at a time (reference)
- EventDrivenDevice: jumps straight to the next counter expiry
Both must produce identical DeviceState observations after every operation.

RegisterFile exposes the device through 32-bit register accesses and
TimeManagerDriver wraps those accesses into the five basic operations,
the way the kernel driver does.
"""
import heapq
import logging
from abc import ABC, abstractmethod
from typing import Literal, Optional

from app.core.errors import (
    BusError,
    ConfigurationError,
    InvalidDelayError,
    ProtocolError,
    SlotBusyError,
    SlotRangeError,
    SpuriousAckError,
    TimeOverflowError,
)
from app.models.device import (
    DATASHEET_BY_OFFSET,
    Access,
    DeviceState,
    RegisterMap,
    SlotState,
)
from app.models.timebase import Duration, TimeUnit

logger = logging.getLogger(__name__)

WORD_MASK = 0xFFFFFFFF
DeviceEngine = Literal["event", "cycle"]


def _as_cycles(n, what: str) -> int:
    if isinstance(n, Duration):
        if n.unit is not TimeUnit.FPGA_CYCLE:
            raise TypeError(f"{what} must be in fpga cycles, got {n.unit.value}")
        return n.value
    if isinstance(n, bool) or not isinstance(n, int):
        raise TypeError(f"{what} must be an int or a Duration, got {type(n).__name__}")
    return n


# ============================================================================
# DEVICE ENGINES
# ============================================================================

class TimeManagerDevice(ABC):
    """System time counter + array of waiting-task down-counters + level-triggered irq"""

    def __init__(self, n_slots: int, counter_width_bits: int = 64):
        if isinstance(n_slots, bool) or not isinstance(n_slots, int) or n_slots < 1:
            raise ConfigurationError(f"n_slots must be >= 1, got {n_slots!r}")
        if not 1 <= counter_width_bits <= 64:
            raise ConfigurationError(f"counter_width_bits must be in 1..64, got {counter_width_bits}")
        self.n_slots = n_slots
        self.counter_width_bits = counter_width_bits
        self._mask = (1 << counter_width_bits) - 1
        self._system_time = 0
        # cycles since reset, never wraps and is not touched by set_time
        self._elapsed = 0
        self._pending: set[int] = set()

    # --- engine-specific -----------------------------------------------------

    @abstractmethod
    def step_cycles(self, n) -> DeviceState:
        """Advance the device clock by n cycles"""

    @abstractmethod
    def cycles_until_next_expiry(self) -> Optional[int]:
        """Cycles until the earliest active slot expires, None when nothing counts"""

    @abstractmethod
    def _load(self, slot: int, ticks: int) -> None: ...

    @abstractmethod
    def _slot_state(self, slot: int) -> SlotState: ...

    @abstractmethod
    def _is_active(self, slot: int) -> bool: ...

    # --- shared operations ---------------------------------------------------

    @property
    def irq_line(self) -> bool:
        return bool(self._pending)

    @property
    def elapsed_cycles(self) -> int:
        return self._elapsed

    def get_time(self) -> int:
        return self._system_time

    def set_time(self, value: int) -> DeviceState:
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeError(f"system time must be an int, got {type(value).__name__}")
        if not 0 <= value <= self._mask:
            raise TimeOverflowError(
                f"system time {value} does not fit in {self.counter_width_bits} bits"
            )
        self._system_time = value
        return self.snapshot()

    def task_delay(self, slot: int, ticks) -> DeviceState:
        ticks = _as_cycles(ticks, "delay")
        self._check_slot(slot)
        if ticks < 1:
            raise InvalidDelayError(f"delay must be at least 1 cycle, got {ticks}")
        if ticks > self._mask:
            raise TimeOverflowError(
                f"delay {ticks} does not fit in a {self.counter_width_bits}-bit counter"
            )
        if self._is_active(slot):
            raise SlotBusyError(f"slot {slot} is still counting down")
        if slot in self._pending:
            raise SlotBusyError(f"slot {slot} has an unacknowledged wake")
        self._load(slot, ticks)
        return self.snapshot()

    def get_tasks_to_wake(self) -> frozenset[int]:
        return frozenset(self._pending)

    def clear_task(self, slot: int) -> DeviceState:
        self._check_slot(slot)
        if slot not in self._pending:
            raise SpuriousAckError(f"slot {slot} is not pending")
        self._pending.discard(slot)
        return self.snapshot()

    def snapshot(self) -> DeviceState:
        return DeviceState(
            system_time=self._system_time,
            slots=tuple(self._slot_state(i) for i in range(self.n_slots)),
            pending=frozenset(self._pending),
            irq_line=self.irq_line,
        )

    def _check_slot(self, slot: int) -> None:
        if isinstance(slot, bool) or not isinstance(slot, int) or not 0 <= slot < self.n_slots:
            raise SlotRangeError(f"slot {slot!r} outside 0..{self.n_slots - 1}")

    def _advance(self, n: int) -> None:
        self._elapsed += n
        self._system_time = (self._system_time + n) & self._mask


class CycleSteppedDevice(TimeManagerDevice):
    """Reference engine: every counter moves one cycle at a time"""

    def __init__(self, n_slots: int, counter_width_bits: int = 64):
        super().__init__(n_slots, counter_width_bits)
        self._remaining = [0] * n_slots
        self._active = [False] * n_slots

    def step_cycles(self, n) -> DeviceState:
        n = _as_cycles(n, "step")
        if n < 0:
            raise ValueError(f"cannot step a negative number of cycles: {n}")
        for _ in range(n):
            self._clock_edge()
        return self.snapshot()

    def _clock_edge(self) -> None:
        self._advance(1)
        for slot in range(self.n_slots):
            if not self._active[slot]:
                continue
            self._remaining[slot] -= 1
            if self._remaining[slot] == 0:
                self._active[slot] = False
                self._pending.add(slot)

    def cycles_until_next_expiry(self) -> Optional[int]:
        counting = [r for r, a in zip(self._remaining, self._active) if a]
        return min(counting) if counting else None

    def _load(self, slot: int, ticks: int) -> None:
        self._remaining[slot] = ticks
        self._active[slot] = True

    def _slot_state(self, slot: int) -> SlotState:
        return SlotState(remaining=self._remaining[slot], active=self._active[slot])

    def _is_active(self, slot: int) -> bool:
        return self._active[slot]


class EventDrivenDevice(TimeManagerDevice):
    """Fast-forward engine: keeps absolute expiry cycles in a heap"""

    def __init__(self, n_slots: int, counter_width_bits: int = 64):
        super().__init__(n_slots, counter_width_bits)
        self._expiry: dict[int, int] = {}
        self._heap: list[tuple[int, int]] = []

    def step_cycles(self, n) -> DeviceState:
        n = _as_cycles(n, "step")
        if n < 0:
            raise ValueError(f"cannot step a negative number of cycles: {n}")
        target = self._elapsed + n
        while self._heap and self._heap[0][0] <= target:
            expiry, slot = heapq.heappop(self._heap)
            self._advance(expiry - self._elapsed)
            del self._expiry[slot]
            self._pending.add(slot)
        self._advance(target - self._elapsed)
        return self.snapshot()

    def cycles_until_next_expiry(self) -> Optional[int]:
        if not self._heap:
            return None
        return self._heap[0][0] - self._elapsed

    def _load(self, slot: int, ticks: int) -> None:
        expiry = self._elapsed + ticks
        self._expiry[slot] = expiry
        heapq.heappush(self._heap, (expiry, slot))

    def _slot_state(self, slot: int) -> SlotState:
        expiry = self._expiry.get(slot)
        if expiry is None:
            return SlotState(remaining=0, active=False)
        return SlotState(remaining=expiry - self._elapsed, active=True)

    def _is_active(self, slot: int) -> bool:
        return slot in self._expiry


def reset(
    n_slots: int,
    engine: DeviceEngine = "event",
    counter_width_bits: int = 64,
) -> TimeManagerDevice:
    """Power-on state: time 0, every slot idle, nothing pending, irq low"""
    logger.debug(f"Reset {engine} device: {n_slots} slots, {counter_width_bits}-bit counters")
    if engine == "event":
        return EventDrivenDevice(n_slots, counter_width_bits)
    if engine == "cycle":
        return CycleSteppedDevice(n_slots, counter_width_bits)
    raise ConfigurationError(f"unknown device engine {engine!r} (expected 'event' or 'cycle')")


# ============================================================================
# REGISTER INTERFACE
# ============================================================================

class RegisterFile:
    """
    32-bit bus view of the device.

    Time reads latch the high word on TIME_LO so a LO/HI pair is never torn.
    64-bit writes (SetTime, TaskDelay) stage the low half and commit on the
    high half.
    """

    def __init__(self, device: TimeManagerDevice):
        if device.n_slots > 32:
            raise ConfigurationError(
                f"WAKE_MASK is 32 bits wide; {device.n_slots} slots cannot be reported"
            )
        self.device = device
        self._time_hi_latch: Optional[int] = None
        self._time_lo_staged: Optional[int] = None
        self._delay_slot: Optional[int] = None
        self._delay_lo: Optional[int] = None

    def read_register(self, addr: int) -> int:
        info = self._decode(addr)
        if info.access is Access.WO:
            raise BusError(f"{info.name} (0x{addr:02X}) is write-only")

        if addr == RegisterMap.REG_TIME_LO:
            now = self.device.get_time()
            self._time_hi_latch = (now >> 32) & WORD_MASK
            return now & WORD_MASK
        if addr == RegisterMap.REG_TIME_HI:
            if self._time_hi_latch is None:
                raise ProtocolError("TIME_HI read without a preceding TIME_LO read")
            value, self._time_hi_latch = self._time_hi_latch, None
            return value
        # WAKE_MASK
        mask = 0
        for slot in self.device.get_tasks_to_wake():
            mask |= 1 << slot
        return mask

    def write_register(self, addr: int, value: int) -> DeviceState:
        info = self._decode(addr)
        if info.access is Access.RO:
            raise BusError(f"{info.name} (0x{addr:02X}) is read-only")
        if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value <= WORD_MASK:
            raise BusError(f"value {value!r} is not a 32-bit word")

        if addr == RegisterMap.REG_TIME_LO:
            self._time_lo_staged = value
        elif addr == RegisterMap.REG_TIME_HI:
            if self._time_lo_staged is None:
                raise ProtocolError("TIME_HI written without a staged TIME_LO")
            low, self._time_lo_staged = self._time_lo_staged, None
            return self.device.set_time((value << 32) | low)
        elif addr == RegisterMap.REG_DELAY_SLOT:
            self._delay_slot = value
        elif addr == RegisterMap.REG_DELAY_LO:
            self._delay_lo = value
        elif addr == RegisterMap.REG_DELAY_HI:
            if self._delay_slot is None:
                raise ProtocolError("DELAY_HI written without DELAY_SLOT")
            if self._delay_lo is None:
                raise ProtocolError("DELAY_HI written without DELAY_LO")
            slot, low = self._delay_slot, self._delay_lo
            self._delay_slot = self._delay_lo = None
            return self.device.task_delay(slot, (value << 32) | low)
        elif addr == RegisterMap.REG_ACK:
            return self.device.clear_task(value)
        return self.device.snapshot()

    @staticmethod
    def _decode(addr: int):
        info = DATASHEET_BY_OFFSET.get(addr)
        if info is None:
            raise BusError(f"no register at offset {addr!r}")
        return info


class TimeManagerDriver:
    """One function per basic operation, each built from register accesses"""

    def __init__(self, registers: RegisterFile):
        self.registers = registers

    def get_time(self) -> int:
        low = self.registers.read_register(RegisterMap.REG_TIME_LO)
        high = self.registers.read_register(RegisterMap.REG_TIME_HI)
        return (high << 32) | low

    def set_time(self, value: int) -> None:
        self.registers.write_register(RegisterMap.REG_TIME_LO, value & WORD_MASK)
        self.registers.write_register(RegisterMap.REG_TIME_HI, (value >> 32) & WORD_MASK)

    def task_delay(self, slot: int, cycles: int) -> None:
        self.registers.write_register(RegisterMap.REG_DELAY_SLOT, slot)
        self.registers.write_register(RegisterMap.REG_DELAY_LO, cycles & WORD_MASK)
        self.registers.write_register(RegisterMap.REG_DELAY_HI, (cycles >> 32) & WORD_MASK)

    def get_tasks_to_wake(self) -> list[int]:
        mask = self.registers.read_register(RegisterMap.REG_WAKE_MASK)
        return [slot for slot in range(32) if mask >> slot & 1]

    def clear_task(self, slot: int) -> None:
        self.registers.write_register(RegisterMap.REG_ACK, slot)
