"""Seeded xorshift64* generator for reproducible benchmark messages.

Kept deliberately platform-independent: the same seed yields the same bit
sequence on every machine, so CSV outputs are comparable across runs.
"""

import numpy as np

_MASK64 = (1 << 64) - 1
_MULT = 0x2545F4914F6CDD1D
_SEED_MIX = 0x9E3779B97F4A7C15


class XorShift64Star:
    def __init__(self, seed: int = 0):
        # state must be nonzero; mixing makes small seeds diverge quickly
        self._state = ((seed & _MASK64) ^ _SEED_MIX) or _SEED_MIX

    def next_u64(self) -> int:
        x = self._state
        x ^= (x >> 12)
        x ^= (x << 25) & _MASK64
        x ^= (x >> 27)
        self._state = x
        return (x * _MULT) & _MASK64

    def bits(self, n: int) -> np.ndarray:
        """Return n pseudo-random bits as a uint8 array of 0/1."""
        if n < 0:
            raise ValueError("bit count must be non-negative")
        words = [self.next_u64() for _ in range((n + 63) // 64)]
        if not words:
            return np.zeros(0, dtype=np.uint8)
        raw = b"".join(w.to_bytes(8, "big") for w in words)
        return np.unpackbits(np.frombuffer(raw, dtype=np.uint8))[:n]

    def bytes(self, n: int) -> bytes:
        return np.packbits(self.bits(8 * n)).tobytes()
