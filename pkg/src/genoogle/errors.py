"""Exception types raised across the package."""


class GenoogleError(Exception):
    """Base class for all errors raised by this package."""


class InvalidSymbolError(GenoogleError):
    """A character outside the DNA alphabet where a base was required."""

    def __init__(self, symbol: str, position: int):
        super().__init__(f"invalid symbol {symbol!r} at position {position}")
        self.symbol = symbol
        self.position = position


class WordLengthError(GenoogleError):
    """Word length outside the 1..16 range a packed word can hold."""


class CorruptWordError(GenoogleError):
    """Packed word value inconsistent with its stated length."""


class MaskFormatError(GenoogleError):
    """Seed mask pattern is not a usable keep/drop pattern."""


class WindowSizeError(GenoogleError):
    """Window length does not match the mask it is applied with."""


class IngestError(GenoogleError):
    """Malformed FASTA input."""


class CapacityError(GenoogleError):
    """Bank exceeds the 32-bit sequence count or length limits."""


class BankFormatError(GenoogleError):
    """File is not a recognized bank or index (bad magic or version)."""


class CorruptionError(GenoogleError):
    """File is truncated or internally inconsistent."""


class NotFoundError(GenoogleError):
    """Unknown sequence id or bank name."""


class ProvenanceError(GenoogleError):
    """Bank, index and mask do not belong together."""


class QueryTooShortError(GenoogleError):
    """Query shorter than the mask window length."""


class ParameterError(GenoogleError):
    """Parameter value outside its documented domain."""
