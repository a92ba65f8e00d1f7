"""Exception hierarchy for cylwig.

Plain precondition violations (bad arguments, incompatible objects) raise
``ValueError``; the classes below mark numerical/limit failures that a caller
may want to handle differently (the CLI maps them to exit code 3).
"""


class CylwigError(Exception):
    """Base class for numerical/limit failures."""


class TruncationError(CylwigError):
    """A finite OAM window cannot hold the requested state at tolerance."""

    def __init__(self, message, required_window=None):
        super().__init__(message)
        self.required_window = required_window


class BandLimitError(CylwigError):
    """An angle grid is too coarse for the band limit of the data."""


class ReconstructionError(CylwigError):
    """The stored grid does not resolve the density-matrix recovery."""

    def __init__(self, message, deficient_directions=None):
        super().__init__(message)
        self.deficient_directions = deficient_directions or []


class RealnessError(CylwigError):
    """A grid that must be real carries a too-large imaginary part."""
