"""Exception hierarchy shared by all emdtex modules."""


class EmdtexError(ValueError):
    """Base class for every error raised by this package."""


class TooFewExtrema(EmdtexError):
    """Not enough local extrema to build an envelope."""


class SignalTooShort(EmdtexError):
    pass


class FieldTooSmall(EmdtexError):
    pass


class BadWindow(EmdtexError):
    pass


class ShapeMismatch(EmdtexError):
    pass


class OutOfBounds(EmdtexError):
    pass


class EmptySet(EmdtexError):
    pass


class GroupOutOfRange(EmdtexError):
    pass


class BundleError(EmdtexError):
    """A bundle directory is missing files, malformed, or fails its digests."""


class FormatError(EmdtexError):
    """An input file cannot be read or decoded."""
