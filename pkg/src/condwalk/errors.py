"""Exception types shared across the package."""


class CondWalkError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(CondWalkError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConstructionError(CondWalkError, RuntimeError):
    """A potential table failed its internal consistency checks."""


class OracleError(CondWalkError, RuntimeError):
    """The quadrature oracle could not reach the requested accuracy."""


class ConfigError(CondWalkError, ValueError):
    """An estimator or experiment configuration is invalid."""
