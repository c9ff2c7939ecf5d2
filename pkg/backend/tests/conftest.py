from __future__ import annotations

import numpy as np
import pytest

from app.schemas.clock import ClockMap
from app.schemas.scenario import CostModel


@pytest.fixture
def clk() -> ClockMap:
    """Evaluation board: 400 MHz CPU, 102 MHz FPGA, 10 ms master tick"""
    return ClockMap(cpu_freq_hz=400_000_000, fpga_freq_hz=102_000_000, base_period_ns=10_000_000)


@pytest.fixture
def coarse_clk() -> ClockMap:
    """1 us FPGA cycle, 10-cycle master tick: small enough for the cycle-stepped engine"""
    return ClockMap(cpu_freq_hz=4_000_000, fpga_freq_hz=1_000_000, base_period_ns=10_000)


@pytest.fixture
def cost() -> CostModel:
    return CostModel(
        sw_fixed_ns=2000,
        sw_per_timer_ns=500,
        hw_isr_fixed_ns=3000,
        hw_per_wakeup_ns=500,
        reg_access_ns=150,
    )


@pytest.fixture(params=["event", "cycle"])
def engine(request) -> str:
    return request.param


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)
