import enum
from dataclasses import dataclass
from functools import total_ordering

from app.core.errors import TimeOverflowError, UnitMismatchError

U64_MAX = (1 << 64) - 1


class TimeUnit(enum.Enum):
    NS = "ns"
    FPGA_CYCLE = "fpga_cycle"
    MASTER_TICK = "master_tick"


def check_u64(value: int, what: str = "value") -> int:
    """Reject anything that is not a 64-bit unsigned integer"""
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"{what} must be an int, got {type(value).__name__}")
    if value < 0:
        raise TimeOverflowError(f"{what} underflows 0: {value}")
    if value > U64_MAX:
        raise TimeOverflowError(f"{what} overflows 64 bits: {value}")
    return value


class _Quantity:
    __slots__ = ()

    value: int
    unit: TimeUnit

    def _same_unit(self, other: "_Quantity") -> None:
        if not isinstance(other, _Quantity):
            raise UnitMismatchError(f"cannot combine {self!r} with {type(other).__name__}")
        if other.unit is not self.unit:
            raise UnitMismatchError(f"unit mismatch: {self.unit.value} vs {other.unit.value}")

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.value} {self.unit.value})"


@total_ordering
@dataclass(frozen=True, eq=False, repr=False)
class Duration(_Quantity):
    """Length of time in one unit. Never coerced into another unit implicitly."""

    value: int
    unit: TimeUnit

    def __post_init__(self):
        check_u64(self.value, "duration")

    def __add__(self, other: "Duration") -> "Duration":
        if isinstance(other, Instant):
            return other + self
        self._same_unit(other)
        return Duration(check_u64(self.value + other.value, "duration sum"), self.unit)

    def __sub__(self, other: "Duration") -> "Duration":
        if not isinstance(other, Duration):
            raise UnitMismatchError("only a Duration can be subtracted from a Duration")
        self._same_unit(other)
        return Duration(check_u64(self.value - other.value, "duration difference"), self.unit)

    def __mul__(self, k: int) -> "Duration":
        return Duration(check_u64(self.value * k, "scaled duration"), self.unit)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, Duration):
            return NotImplemented
        self._same_unit(other)
        return self.value == other.value

    def __lt__(self, other: "Duration") -> bool:
        if not isinstance(other, Duration):
            return NotImplemented
        self._same_unit(other)
        return self.value < other.value

    def __hash__(self) -> int:
        return hash((self.value, self.unit))


@total_ordering
@dataclass(frozen=True, eq=False, repr=False)
class Instant(_Quantity):
    """Point on a time axis (counted from reset/boot) in one unit."""

    value: int
    unit: TimeUnit

    def __post_init__(self):
        check_u64(self.value, "instant")

    def __add__(self, other: Duration) -> "Instant":
        if not isinstance(other, Duration):
            raise UnitMismatchError("only a Duration can be added to an Instant")
        self._same_unit(other)
        return Instant(check_u64(self.value + other.value, "instant"), self.unit)

    __radd__ = __add__

    def __sub__(self, other):
        self._same_unit(other)
        if isinstance(other, Instant):
            return Duration(check_u64(self.value - other.value, "elapsed time"), self.unit)
        return Instant(check_u64(self.value - other.value, "instant"), self.unit)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Instant):
            return NotImplemented
        self._same_unit(other)
        return self.value == other.value

    def __lt__(self, other: "Instant") -> bool:
        if not isinstance(other, Instant):
            return NotImplemented
        self._same_unit(other)
        return self.value < other.value

    def __hash__(self) -> int:
        return hash(("instant", self.value, self.unit))


def ns(value: int) -> Duration:
    return Duration(value, TimeUnit.NS)


def fpga_cycles(value: int) -> Duration:
    return Duration(value, TimeUnit.FPGA_CYCLE)


def master_ticks(value: int) -> Duration:
    return Duration(value, TimeUnit.MASTER_TICK)
