from fractions import Fraction

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.config import settings


class ClockMap(BaseModel):
    """The three clock domains of the platform"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    cpu_freq_hz: int = Field(settings.CPU_FREQ_HZ, gt=0, description="CPU clock (Hz)")
    fpga_freq_hz: int = Field(settings.FPGA_FREQ_HZ, gt=0, description="Time manager clock (Hz)")
    base_period_ns: int = Field(
        settings.BASE_PERIOD_NS, gt=0, description="Software master tick period (ns)"
    )

    @model_validator(mode="after")
    def _tick_not_finer_than_cycle(self):
        # base_period_ns >= 1e9 / fpga_freq_hz, kept in integers
        if self.base_period_ns * self.fpga_freq_hz < 10**9:
            raise ValueError(
                f"base_period_ns={self.base_period_ns} is finer than one FPGA cycle "
                f"at {self.fpga_freq_hz} Hz"
            )
        return self

    @property
    def fpga_cycle_ns(self) -> Fraction:
        """Exact FPGA cycle length; 9.8039... ns at 102 MHz"""
        return Fraction(10**9, self.fpga_freq_hz)

    @property
    def ticks_per_second(self) -> Fraction:
        return Fraction(10**9, self.base_period_ns)
