"""
Exception hierarchy shared by every layer.
The CLI maps TimeManagerError to exit code 1 and OSError to exit code 2.
"""


class TimeManagerError(Exception):
    """Base class for all simulator errors"""


class ConfigurationError(TimeManagerError):
    """Invalid construction parameter (clock, device size, task set, ...)"""


class UnitMismatchError(TimeManagerError):
    """Arithmetic or comparison across different time units"""


class TimeOverflowError(TimeManagerError):
    """Value does not fit in the counter width (64-bit by default)"""


class InvalidDelayError(TimeManagerError):
    """A delay of zero ticks/cycles was requested"""


class SlotRangeError(TimeManagerError):
    """Slot index outside [0, n_slots)"""


class SlotBusyError(TimeManagerError):
    """Slot is still counting down or waiting for acknowledgment"""


class SpuriousAckError(TimeManagerError):
    """Acknowledgment for a slot that is not pending"""


class BusError(TimeManagerError):
    """Unknown register address or wrong access direction"""


class ProtocolError(TimeManagerError):
    """Register accesses in an order the device does not accept"""


class DuplicateTimerError(TimeManagerError):
    """A software timer already exists for the task"""


class CapacityError(TimeManagerError):
    """More tasks than the hardware time manager has slots"""


class UnknownTaskError(TimeManagerError):
    """Task id absent from the trace"""


class UndefinedRatioError(TimeManagerError):
    """Improvement factor with a zero hardware overhead"""


class SweepError(TimeManagerError):
    """One or more runs of a parameter sweep failed"""
