"""Exception types shared across the package.

File-level problems use the builtins: ``OSError`` for unreadable files and
``EOFError`` for files that end before their declared payload.
"""


class PemError(Exception):
    """Base class for all pem-codec errors."""


class CapacityExceeded(PemError):
    """Payload does not fit the image's steganographic capacity."""

    def __init__(self, required: int, capacity: int):
        self.required = required
        self.capacity = capacity
        self.shortfall = required - capacity
        super().__init__(
            f"capacity exceeded by {self.shortfall} bits "
            f"(required {required}, capacity {capacity})"
        )


class MalformedPayload(PemError):
    """Extracted payload does not frame a register/length/message triple."""


class PayloadExhausted(PemError):
    """A bit read ran past the end of the payload stream."""


class ImageTooSmall(PemError):
    """Image dimensions below the operation's minimum."""


class DimensionMismatch(PemError):
    """Two planes (or a plane and mask set) disagree on dimensions."""


class UnsupportedFormat(PemError):
    """Image file is not an 8-bit binary PGM."""


class InvalidTheta(PemError):
    """Stego-channel parameter outside [1, 63]."""


class RegisterLengthMismatch(PemError):
    """Overflow register length disagrees with the image's flagged pixels."""


class BadMagic(PemError):
    """Weight file does not start with the NNPW magic."""


class VersionUnsupported(PemError):
    """Weight file declares an unknown format version."""


class ShapeMismatch(PemError):
    """Weight file tensors or channel counts are inconsistent."""


class DanglingInputRef(PemError):
    """Graph node references a node at or after its own position."""


class GraphEvalError(PemError):
    """Runtime failure while evaluating a convolutional graph."""


class EmptyDistribution(PemError):
    """Statistics requested on a distribution with no samples."""


class DegenerateAllZero(PemError):
    """Lorenz curve requested on an all-zero magnitude distribution."""
