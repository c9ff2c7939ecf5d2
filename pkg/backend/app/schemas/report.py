from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Measurement(BaseModel):
    """Calibrated timing of an operation, repeated and averaged"""

    samples: list[int] = Field(..., min_length=1, description="Calibration-corrected samples (ns)")
    calibration_ns: int = Field(..., ge=0, description="Cost of back-to-back GetTime (ns)")
    mean_ns: float = Field(..., description="Arithmetic mean of samples (ns)")

    @model_validator(mode="after")
    def _consistent(self):
        if any(sample < 0 for sample in self.samples):
            raise ValueError("corrected samples must be >= 0")
        if self.mean_ns != sum(self.samples) / len(self.samples):
            raise ValueError("mean_ns is not the mean of samples")
        return self


class ResourceEstimate(BaseModel):
    """Structural FPGA cost of the time manager (analytic, not a synthesis result)"""

    model_config = ConfigDict(frozen=True)

    n_tasks: int = Field(..., ge=1)
    counter_width_bits: int = Field(..., ge=1)
    flip_flops: int = Field(..., description="Storage: counters + pending flags")
    luts: int = Field(..., description="4-input LUTs: decrement and zero-compare logic")


class RunReport(BaseModel):
    """Per-scenario, per-mode metrics"""

    scenario_id: str
    mode: str
    n_tasks: int = Field(..., ge=0)
    wakeups_per_s: float = Field(..., ge=0)
    overhead_ns_per_s: float = Field(..., ge=0, description="Time-manager CPU time per second (ns)")
    mean_latency_ns: Optional[float] = Field(None, description="Mean wake-up latency (ns)")
    speedup: Optional[float] = Field(None, description="Software overhead / hardware overhead")
    resource_estimate: Optional[ResourceEstimate] = None
