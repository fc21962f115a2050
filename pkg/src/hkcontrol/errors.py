"""Exception hierarchy. Every error carries a stable ``code`` string."""


class HKError(Exception):
    code = "ERROR"


class InvalidParamError(HKError, ValueError):
    code = "INVALID_PARAM"


class RationalOverflowError(HKError, OverflowError):
    """A rational opinion outgrew the configured bit budget; rerun in float64."""

    code = "OVERFLOW"


class WrongMError(HKError, ValueError):
    code = "WRONG_M"


class InsufficientMError(HKError, ValueError):
    code = "INSUFFICIENT_M"


class EpsilonFailureError(HKError, RuntimeError):
    code = "EPSILON_FAILURE"


class InternalControlError(HKError, RuntimeError):
    code = "INTERNAL"


class BudgetExceededError(HKError, RuntimeError):
    code = "BUDGET_EXCEEDED"


class MonitorViolation(HKError, AssertionError):
    code = "MONITOR_VIOLATION"
