class RasecError(Exception):
    """Base class for library errors."""


class ConfigError(RasecError, ValueError):
    """Invalid configuration or parameters."""


class DomainError(RasecError, ValueError):
    """A point or argument lies outside where an operation is defined."""


class NumericalError(RasecError, ArithmeticError):
    """A linear-algebra step failed, e.g. a covariance matrix is not positive definite."""


class StrategyError(RasecError):
    """An acquisition strategy has no feasible candidate to choose from."""
