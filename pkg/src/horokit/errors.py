"""Exception hierarchy shared by all horokit modules."""


class HorokitError(Exception):
    """Base class for all toolkit errors."""


class DomainValidationError(HorokitError, ValueError):
    """An input is outside the mathematical domain of an operation."""


class PreconditionError(HorokitError, ValueError):
    """A documented hypothesis of an operation is violated (e.g. convexity)."""


class NumericError(HorokitError, RuntimeError):
    """A numerical procedure failed (non-finite values, no convergence)."""


class SearchError(NumericError):
    """A bracketing / root search did not locate its target."""


class ConsistencyError(NumericError):
    """An internal cross-check failed, flagging an inconsistent result."""


class DataFormatError(HorokitError, ValueError):
    """A specification file or table has an invalid structure."""
