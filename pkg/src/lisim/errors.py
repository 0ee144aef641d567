"""Exception hierarchy shared by all lisim modules."""


class LisimError(Exception):
    """Base class for package-specific errors."""


class ConfigError(LisimError):
    """Invalid configuration: bad geometry, sweep values, or config file."""


class NumericalDomainError(LisimError):
    """An input left the numerical domain of an operation.

    Raised for non-Hermitian matrices where hermiticity is required,
    non-positive-definite matrices where positive definiteness is
    required, non-finite entries, and users placed on or behind the
    antenna plane.
    """


class DegenerateChannelError(NumericalDomainError):
    """The raw channel is identically zero and cannot be normalized."""
