"""Exception hierarchy shared by all modules."""


class PlayDiffError(Exception):
    """Base class for library errors."""


class DomainError(PlayDiffError, ValueError):
    """A time or signal lies outside the admissible domain."""


class ParameterError(PlayDiffError, ValueError):
    """A numerical parameter is outside its admissible range."""


class SignalFormatError(PlayDiffError, ValueError):
    """A signal file could not be parsed."""


class DecompositionError(PlayDiffError, ArithmeticError):
    """No validated plus/minus partition could be constructed."""


class StaleDecompositionError(PlayDiffError, ValueError):
    """A decomposition was used outside the ball it was validated for."""


class SolverError(PlayDiffError, ArithmeticError):
    """The semismooth Newton iteration broke down."""
