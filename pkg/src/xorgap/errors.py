"""Shared exception types."""


class DimensionError(ValueError):
    """An array has the wrong shape for the requested operation."""


class ScaleError(ValueError):
    """The requested size is outside the range this operation supports."""


class DegenerateGameError(ValueError):
    """The input cannot produce a playable game (all coefficients vanish)."""


class UnspecifiedConstantError(ValueError):
    """A bound was requested whose constant must be supplied by the caller."""
