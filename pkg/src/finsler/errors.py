"""Exception hierarchy shared by every module in the package."""


class FinslerError(Exception):
    """Base class for all errors raised by this package."""


class ArgumentError(FinslerError, ValueError):
    """A caller-supplied argument violates a documented precondition."""


class EvaluationError(FinslerError):
    """Numeric evaluation failed (division by zero, sqrt of a negative,
    non-finite value during jet propagation)."""


class ParseError(FinslerError):
    """Expression text could not be parsed.  ``offset`` is the byte offset
    of the offending token in the input string."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class RegularityError(FinslerError):
    """The queried point lies outside the metric's regularity domain
    (singular fundamental tensor, failed convexity criterion, zero
    denominator in a closed form)."""


class DomainError(FinslerError):
    """Arguments are outside the mathematical domain of the operation
    (e.g. b^2 < s^2, or a volume quantity requested at b = 0)."""


class DegenerateFlagError(FinslerError):
    """The transverse vector of a flag is parallel to the flagpole."""


class IntegrationError(FinslerError):
    """A trajectory left the regularity domain.  ``last_t`` is the last
    parameter value at which the state was still valid."""

    def __init__(self, message: str, last_t: float):
        super().__init__(f"{message} (last valid t = {last_t})")
        self.last_t = last_t


class ConfigError(FinslerError):
    """A configuration document is invalid.  ``path`` names the JSON
    location of the offending entry, e.g. ``"a.1.2"``."""

    def __init__(self, message: str, path: str):
        super().__init__(f"{path}: {message}")
        self.path = path
