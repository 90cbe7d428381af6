"""Exception hierarchy shared by every solver module."""


class FractSplitError(Exception):
    """Base class for all package errors."""


class DomainError(FractSplitError, ValueError):
    pass


class NonCommensurate(FractSplitError, ValueError):
    """Domain length is not an integer multiple of the cell width."""


class DegenerateGrid(FractSplitError, ValueError):
    pass


class NonFiniteInput(FractSplitError, ValueError):
    pass


class GridMismatch(FractSplitError, ValueError):
    pass


class IncompatibleRefinement(FractSplitError, ValueError):
    pass


class DegenerateFit(FractSplitError, ValueError):
    pass


class NumericalFailure(FractSplitError, RuntimeError):
    """Raised when a numerical procedure cannot honour its contract."""


class QuadratureFailure(NumericalFailure):
    pass


class CflViolation(NumericalFailure):
    pass


class SamplerUnavailable(FractSplitError, RuntimeError):
    pass


class ConfigError(FractSplitError, ValueError):
    """Problem with a run configuration document.

    ``path`` locates the offending key as a dotted string (``"grid.dx"``).
    """

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class ParseError(ConfigError):
    pass


class SchemaError(ConfigError):
    pass


class IoError(FractSplitError, OSError):
    """An output file could not be written."""
