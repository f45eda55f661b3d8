"""Exception hierarchy shared by the library and the harness."""


class SdtgaError(Exception):
    """Base class for every error raised on purpose by this package."""


class ParameterError(SdtgaError, ValueError):
    """A numeric parameter lies outside its domain (e.g. p outside [0, 1])."""


class ConfigError(SdtgaError, ValueError):
    """Solver or experiment configuration violates its invariants."""


class DomainError(SdtgaError, ValueError):
    """An element id or ground-set size does not fit the system it is used with."""


class ContractError(SdtgaError, ValueError):
    """A call broke an operation's precondition (e.g. u already in S)."""


class CapacityError(SdtgaError):
    """An exhaustive routine was asked to enumerate beyond its limit."""


class InstanceParseError(SdtgaError):
    """Instance file is not UTF-8 text or not parseable JSON."""


class ValidationError(SdtgaError, ValueError):
    """Instance content fails schema validation; `field` names the offender."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class SolverError(SdtgaError):
    """A solver invariant failed at run time."""
