class IsvdError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(IsvdError, ValueError):
    """Operand shapes are incompatible."""


class NonFiniteError(IsvdError, ValueError):
    """An input contains NaN or Inf."""


class DegenerateColumnError(IsvdError):
    """A column collapsed to (numerically) zero W-norm."""


class ZeroFirstColumnError(DegenerateColumnError):
    """The first column of a stream is zero, so there is nothing to
    initialize the decomposition with."""


class RunStopped(IsvdError):
    """An update failed part way through a stream. Drivers set ``partial``
    to the ``(CoreSVD, RunReport)`` of the columns absorbed before it.
    """

    partial = None


class SingularUpdateError(RunStopped):
    """A small right factor lost rank and cannot be pseudo-inverted."""


class RankLimitExceeded(RunStopped):
    """The decomposition would grow past the configured rank cap."""


class EmptyStreamError(IsvdError):
    """A column stream produced no columns."""


class DegenerateMeshError(IsvdError, ValueError):
    """A mesh has invalid parameters or a zero-area triangle."""


class StreamFormatError(IsvdError):
    """A column stream file is malformed or truncated."""


class WeightMatrixError(IsvdError):
    """A weight matrix is unreadable, nonsquare, asymmetric or not SPD."""


class FactorStoreError(IsvdError):
    """Saved factors are missing or inconsistent with their manifest."""


class DeskScaleExceeded(IsvdError):
    """A dense computation was requested on an input that is too large."""


class UnknownAlgorithm(IsvdError, KeyError):
    """No driver is registered for the requested algorithm."""


# Errors caused by the data a run was given (as opposed to a bug or a failed
# property check). Management commands exit with status 2 for these.
INPUT_ERRORS = (
    DimensionMismatch,
    NonFiniteError,
    DegenerateColumnError,
    SingularUpdateError,
    RankLimitExceeded,
    EmptyStreamError,
    DegenerateMeshError,
    StreamFormatError,
    WeightMatrixError,
    FactorStoreError,
    DeskScaleExceeded,
    UnknownAlgorithm,
)
