"""Exception types raised across the package."""


class DriftIDSError(ValueError):
    """Base class for all package-specific errors."""


# --- capture / record parsing ---

class BadMagic(DriftIDSError):
    """Input does not start with a recognized pcap magic number."""


class Truncated(DriftIDSError):
    """A pcap record header or body is shorter than declared."""


class UnsupportedLinkType(DriftIDSError):
    """The capture's link type is not Ethernet."""


class MissingColumn(DriftIDSError):
    """A required CSV column is absent from the header."""


class UnparsableField(DriftIDSError):
    """A CSV field could not be converted; carries the offending row index."""

    def __init__(self, row: int, column: str, value: str):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"row {row}: cannot parse {column}={value!r}")


# --- modelling ---

class EmptyDataset(DriftIDSError):
    """Training was requested on an empty dataset."""


class EmptyChunk(DriftIDSError):
    """A labeled chunk contains no samples."""


class NoNormalSamples(DriftIDSError):
    """An operation requiring normal-labeled samples found none."""


class LengthMismatch(DriftIDSError):
    """Two parallel sequences have different lengths."""


class WidthMismatch(DriftIDSError):
    """A feature matrix width does not match the model's training width."""


class InvalidSpec(DriftIDSError):
    """A scenario specification violates its constraints."""
