from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """
    Platform defaults, overridable through environment variables or `.env`.

    The values describe the evaluation board: 400 MHz CPU, time manager
    clocked at 102 MHz, 10 ms master tick, 12 waiting-task counters.
    """

    # Clock domains
    CPU_FREQ_HZ: int = 400_000_000
    FPGA_FREQ_HZ: int = 102_000_000
    BASE_PERIOD_NS: int = 10_000_000

    # Device
    N_SLOTS: int = 12
    COUNTER_WIDTH_BITS: int = 64

    # Cost model placeholders (ns), not measured values
    SW_FIXED_NS: int = 2000
    SW_PER_TIMER_NS: int = 500
    HW_ISR_FIXED_NS: int = 3000
    HW_PER_WAKEUP_NS: int = 500
    REG_ACCESS_NS: int = 150

    # Benchmark harness
    REPETITIONS: int = 10
    MAX_WORKERS: int = 4
    DEFAULT_DURATION_NS: int = 1_000_000_000
    DEFAULT_TASK_PERIOD_NS: int = 1_000_000_000

    LOG_LEVEL: str = "INFO"

    class Config:
        env_file = ".env"


settings = Settings()
