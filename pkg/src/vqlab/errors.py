"""Exception hierarchy shared across the package."""


class VQLabError(Exception):
    """Base class for all vqlab errors."""


class ZeroMassError(VQLabError):
    """An interval carries (numerically) no probability mass.

    Carries the offending interval index when raised from a cell update.
    """

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class NotSortedError(VQLabError, ValueError):
    """Quantizer positions were required to be strictly increasing."""


class TooFewQuantizersError(VQLabError, ValueError):
    """The operation needs more quantizers than were supplied."""


class UnsupportedCountError(VQLabError, ValueError):
    """The neighbor count has no defined shape on this topology."""


class DimensionMismatchError(VQLabError, ValueError):
    """Input vector dimension does not match the codebook dimension."""


class EmptyDataError(VQLabError, ValueError):
    """A nonempty sample or dataset was required."""


class LengthMismatchError(VQLabError, ValueError):
    """Paired sequences have different lengths."""


class ConfigError(VQLabError, ValueError):
    """Experiment configuration is invalid or incomplete."""


class DatasetParseError(VQLabError, ValueError):
    """A dataset file could not be parsed; row/column are 1-based."""

    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class EmptyFileError(DatasetParseError):
    """The dataset file contains no data rows."""


class NonNumericCellError(DatasetParseError):
    """A dataset cell could not be read as a number."""


class NotEnoughDistinctPointsError(VQLabError, ValueError):
    """Fewer distinct data rows than requested codebook entries."""


class OracleNotConvergedError(VQLabError, RuntimeError):
    """The exact-quantizer solver hit its iteration cap; carries the residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class MixedMetricsError(VQLabError, ValueError):
    """Traces with different metric names cannot share one plot."""


class EmptyTracesError(VQLabError, ValueError):
    """No traces were supplied or found."""
