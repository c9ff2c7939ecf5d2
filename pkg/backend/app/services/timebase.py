"""
Conversions between wall time and the discrete time bases.
Requested delays round up (a task never wakes early); readings round down.
"""
from fractions import Fraction

from app.core.errors import ConfigurationError, UnitMismatchError
from app.models.timebase import Duration, TimeUnit, check_u64
from app.schemas.clock import ClockMap

NS_PER_S = 10**9


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def _expect(d: Duration, unit: TimeUnit) -> None:
    if not isinstance(d, Duration) or d.unit is not unit:
        got = d.unit.value if isinstance(d, Duration) else type(d).__name__
        raise UnitMismatchError(f"expected a duration in {unit.value}, got {got}")


def ns_to_fpga_cycles(d: Duration, clk: ClockMap) -> Duration:
    _expect(d, TimeUnit.NS)
    cycles = _ceil_div(d.value * clk.fpga_freq_hz, NS_PER_S)
    return Duration(check_u64(cycles, "fpga cycles"), TimeUnit.FPGA_CYCLE)


def fpga_cycles_to_ns(c: Duration, clk: ClockMap) -> Duration:
    _expect(c, TimeUnit.FPGA_CYCLE)
    return Duration(check_u64(c.value * NS_PER_S // clk.fpga_freq_hz, "ns"), TimeUnit.NS)


def ns_to_master_ticks(d: Duration, clk: ClockMap) -> Duration:
    _expect(d, TimeUnit.NS)
    return Duration(_ceil_div(d.value, clk.base_period_ns), TimeUnit.MASTER_TICK)


def master_ticks_to_ns(t: Duration, clk: ClockMap) -> Duration:
    _expect(t, TimeUnit.MASTER_TICK)
    return Duration(check_u64(t.value * clk.base_period_ns, "ns"), TimeUnit.NS)


def ns_to_cpu_cycles(d: Duration, clk: ClockMap) -> int:
    """CPU cycles spent in `d` (rounded up); used to express overheads on the CPU side"""
    _expect(d, TimeUnit.NS)
    return _ceil_div(d.value * clk.cpu_freq_hz, NS_PER_S)


def quantization_bound_ratio(clk: ClockMap) -> Fraction:
    """Software tick granularity over hardware cycle granularity (~1.02e6 on the board)"""
    return Fraction(clk.base_period_ns) / clk.fpga_cycle_ns


def max_delay_ns(counter_width_bits: int, clk: ClockMap) -> int:
    """
    Longest delay one waiting-task counter of the given width can hold.
    Plain int: at 64 bits the answer (~5,700 years) does not fit in 64-bit ns.
    """
    if not 1 <= counter_width_bits <= 64:
        raise ConfigurationError(f"counter width must be in 1..64, got {counter_width_bits}")
    top = (1 << counter_width_bits) - 1
    return top * NS_PER_S // clk.fpga_freq_hz
