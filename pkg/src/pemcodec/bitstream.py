"""Bit-level payload plumbing: bit sequences with a read cursor and the
register/length/message payload framing.

Byte conversions are MSB-first. The payload layout is

    register || big-endian 32-bit message bit-count || message || zero padding

The register length is never framed because the decoder recomputes it from
the restored image; the message length must be framed because nothing else
pins it down.
"""

from __future__ import annotations

import numpy as np

from .errors import CapacityExceeded, MalformedPayload, PayloadExhausted

LENGTH_FIELD_BITS = 32


class BitStream:
    """An ordered bit sequence with a cursor for sequential reads.

    Bits are stored as a uint8 array of 0/1 values. ``cursor`` is the index
    of the next unread bit; ``read`` advances it and raises
    ``PayloadExhausted`` past the end.
    """

    __slots__ = ("bits", "cursor")

    def __init__(self, bits=None):
        if bits is None:
            self.bits = np.zeros(0, dtype=np.uint8)
        else:
            arr = np.asarray(bits, dtype=np.uint8)
            if arr.ndim != 1:
                raise ValueError("bits must be one-dimensional")
            if arr.size and arr.max() > 1:
                raise ValueError("bits must be 0 or 1")
            self.bits = arr
        self.cursor = 0

    @classmethod
    def from_bytes(cls, data: bytes) -> "BitStream":
        return cls(np.unpackbits(np.frombuffer(data, dtype=np.uint8)))

    @classmethod
    def from_uint(cls, value: int, width: int) -> "BitStream":
        """Big-endian fixed-width unsigned integer."""
        if value < 0 or value >= (1 << width):
            raise ValueError(f"{value} does not fit in {width} bits")
        return cls([(value >> (width - 1 - i)) & 1 for i in range(width)])

    @classmethod
    def zeros(cls, n: int) -> "BitStream":
        return cls(np.zeros(n, dtype=np.uint8))

    def to_bytes(self) -> bytes:
        if len(self) % 8:
            raise ValueError("bit count is not a multiple of 8")
        return np.packbits(self.bits).tobytes()

    def to_uint(self) -> int:
        value = 0
        for b in self.bits:
            value = (value << 1) | int(b)
        return value

    def read(self, n: int) -> np.ndarray:
        """Return the next n bits and advance the cursor."""
        if self.cursor + n > len(self):
            raise PayloadExhausted(
                f"read of {n} bits at cursor {self.cursor} exceeds "
                f"stream length {len(self)}"
            )
        out = self.bits[self.cursor : self.cursor + n]
        self.cursor += n
        return out

    @property
    def remaining(self) -> int:
        return len(self) - self.cursor

    def slice(self, start: int, stop: int) -> "BitStream":
        return BitStream(self.bits[start:stop])

    def __len__(self) -> int:
        return int(self.bits.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitStream):
            return NotImplemented
        return len(self) == len(other) and bool(np.all(self.bits == other.bits))

    def __repr__(self) -> str:
        head = "".join(str(b) for b in self.bits[:32])
        tail = "..." if len(self) > 32 else ""
        return f"BitStream({len(self)} bits: {head}{tail}, cursor={self.cursor})"


def concat(a: BitStream, b: BitStream) -> BitStream:
    """Concatenate two streams into a fresh one; inputs are untouched."""
    return BitStream(np.concatenate([a.bits, b.bits]))


def build_payload(register: BitStream, message: BitStream, capacity: int) -> BitStream:
    """Frame register and message into a zero-padded payload of `capacity` bits.

    The zero padding means every stego-channel residual seen during embedding
    can be fed a bit, so the embedder never starves and the decoder never
    meets an unmodulated channel residual.
    """
    required = len(register) + LENGTH_FIELD_BITS + len(message)
    if required > capacity:
        raise CapacityExceeded(required, capacity)
    bits = np.zeros(capacity, dtype=np.uint8)
    pos = 0
    for part in (register, BitStream.from_uint(len(message), LENGTH_FIELD_BITS), message):
        bits[pos : pos + len(part)] = part.bits
        pos += len(part)
    return BitStream(bits)


def parse_payload(payload: BitStream, register_len: int) -> tuple[BitStream, BitStream]:
    """Split a payload back into (register, message), discarding padding."""
    if register_len + LENGTH_FIELD_BITS > len(payload):
        raise MalformedPayload(
            f"payload of {len(payload)} bits cannot hold a {register_len}-bit "
            f"register and a {LENGTH_FIELD_BITS}-bit length field"
        )
    register = payload.slice(0, register_len)
    length = payload.slice(register_len, register_len + LENGTH_FIELD_BITS).to_uint()
    start = register_len + LENGTH_FIELD_BITS
    if start + length > len(payload):
        raise MalformedPayload(
            f"length field declares {length} message bits but only "
            f"{len(payload) - start} remain"
        )
    return register, payload.slice(start, start + length)
