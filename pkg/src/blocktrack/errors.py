"""Exception hierarchy shared across the package.

Everything raised on bad data or bad arguments derives from
:class:`BlocktrackError`, so callers (including the CLI) can catch one
type and map it to a data-error exit code.
"""


class BlocktrackError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(BlocktrackError, ValueError):
    """A parameter is outside its documented range."""


class ShapeError(BlocktrackError, ValueError):
    """Arrays or grids that must agree do not."""


class EmptyDomainError(BlocktrackError, ValueError):
    """A spatial crop selected no cells."""


class CalendarError(BlocktrackError, ValueError):
    """A date is invalid under the declared calendar."""


class InsufficientDataError(BlocktrackError, ValueError):
    """Too few time steps or years for the requested statistic."""


class InsufficientEnsembleError(BlocktrackError, ValueError):
    """Fewer ensemble members than the statistic requires."""


class AlignmentError(BlocktrackError, ValueError):
    """Two date-indexed streams do not cover the same dates."""


class MalformedHeaderError(BlocktrackError, ValueError):
    """A container header is inconsistent or unreadable."""


class CorruptInputError(BlocktrackError, IOError):
    """A payload failed its checksum or length check."""
