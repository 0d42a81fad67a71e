"""Exception hierarchy shared by the package."""


class GameError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(GameError, ValueError):
    """Array dimensions do not match the game."""


class DomainError(GameError, ValueError):
    """A point lies outside the open domain of the log-barrier."""


class StepDomainError(DomainError):
    """A mirror-step denominator is non-positive.

    ``index`` is the offending coordinate.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NumericalError(GameError, ArithmeticError):
    """An iterative solver failed to converge.

    ``residual`` holds the last measured residual when available.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InfeasibleParametersError(GameError, ValueError):
    """No starting offset satisfies the schedule constraints."""


class ConfigError(GameError, ValueError):
    """A run configuration failed validation before any step was taken."""


class GameFormatError(GameError, ValueError):
    """A game file could not be parsed or violates the model.

    ``field`` names the offending location, e.g. ``states[3].losses['0,1']``.
    """

    def __init__(self, message, field=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(field)
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
        self.field = field
        self.line = line


class InsufficientDataError(GameError, ValueError):
    """Too few usable records to fit a rate."""
