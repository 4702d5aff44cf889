"""Exception hierarchy shared by the models, services and the CLI."""


class MagnonError(Exception):
    """Base class for every error raised by this package."""


class MagnonValidationError(MagnonError, ValueError):
    """Invalid user input. The CLI maps these to exit code 1."""


class ChainTooShortError(MagnonValidationError):
    """The chain cannot host the requested block(s)."""


class BlockMismatchError(MagnonValidationError):
    """A target state occupies sites outside the receiving block."""


class BlockOverlapError(MagnonValidationError):
    """Sending and receiving blocks overlap."""


class GridError(MagnonValidationError):
    """A sweep grid is empty, unsorted or not uniform."""


class UsageError(MagnonValidationError):
    """Bad command line."""


class DimensionCapError(MagnonValidationError):
    """The exact oracle was asked for more sites than its cap allows."""


class SectorError(MagnonError, ValueError):
    """An excitation-sector precondition was violated."""


class MixedSectorError(SectorError):
    pass


class UnsupportedSectorError(SectorError):
    pass


class SectorOverflowError(SectorError):
    pass


class NumericalInvariantError(MagnonError, ArithmeticError):
    """A computed object broke a numerical invariant. The CLI maps these to exit code 2."""
