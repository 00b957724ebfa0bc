"""Exception hierarchy.

Every error carries a stable integer ``code`` so the CLI can emit
machine-readable failures.
"""


class NormalityLabError(Exception):
    code = 1


class ArgumentError(NormalityLabError, ValueError):
    code = 10


class RangeError(NormalityLabError, OverflowError):
    """An integer left the signed 64-bit range."""

    code = 11


class PreconditionError(NormalityLabError, ValueError):
    code = 12


class CapacityError(NormalityLabError):
    """A requested enumeration or truncation exceeds the configured budget."""

    code = 13


class DSEQError(NormalityLabError, ValueError):
    code = 20


class DSEQHeaderError(DSEQError):
    code = 21


class DSEQDigitError(DSEQError):
    code = 22


class DSEQTruncatedError(DSEQError):
    code = 23
