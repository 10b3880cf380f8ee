"""Exception hierarchy shared by all modules."""


class CakeError(Exception):
    """Base class for engine errors."""


class ConfigurationError(CakeError):
    """Inconsistent run configuration, e.g. two different radicands."""


class PreconditionError(CakeError, ValueError):
    """An operation was called on inputs outside its domain."""


class UnsupportedSetting(CakeError):
    """The requested setting is deliberately not handled."""


class InvariantError(CakeError):
    """An internal invariant failed; indicates a bug or a false claim about the input."""


class EnumerationBudgetExceeded(CakeError):
    """Exhaustive search would exceed the configured budget."""


class MeasurabilityError(CakeError):
    """A mediator acted differently on two chronicles with equal content."""
