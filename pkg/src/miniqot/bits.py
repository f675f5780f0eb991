"""Bitstring helpers.

Bitstrings are 1-D ``numpy.uint8`` arrays holding 0/1 values.  On the wire a
bitstring is a 4-byte little-endian bit count followed by the bits packed
little-endian within each byte.
"""

from __future__ import annotations

import struct

import numpy as np

BITS = np.uint8


def as_bits(x) -> np.ndarray:
    """Coerce a sequence of 0/1 values to a bitstring."""
    arr = np.asarray(x, dtype=np.uint8).reshape(-1)
    if arr.size and arr.max() > 1:
        raise ValueError("bitstring entries must be 0 or 1")
    return arr


def zeros(n: int) -> np.ndarray:
    return np.zeros(n, dtype=np.uint8)


def random_bits(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.integers(0, 2, size=n, dtype=np.uint8)


def xor(a, b) -> np.ndarray:
    a, b = as_bits(a), as_bits(b)
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} != {b.size}")
    return a ^ b


def from_int(value: int, n: int) -> np.ndarray:
    """Little-endian bit decomposition of ``value`` into ``n`` bits."""
    if value < 0 or value >> n:
        raise ValueError(f"{value} does not fit in {n} bits")
    return np.array([(value >> i) & 1 for i in range(n)], dtype=np.uint8)


def to_int(bits) -> int:
    out = 0
    for i, b in enumerate(as_bits(bits)):
        out |= int(b) << i
    return out


def pack(bits) -> bytes:
    bits = as_bits(bits)
    return np.packbits(bits, bitorder="little").tobytes()


def unpack(data: bytes, n: int) -> np.ndarray:
    raw = np.frombuffer(data, dtype=np.uint8)
    if raw.size * 8 < n:
        raise ValueError("not enough bytes for requested bit count")
    return np.unpackbits(raw, bitorder="little", count=n)


def serialize(bits) -> bytes:
    """Length-prefixed wire form."""
    bits = as_bits(bits)
    return struct.pack("<I", bits.size) + pack(bits)


def deserialize(data: bytes, offset: int = 0) -> tuple[np.ndarray, int]:
    """Parse one length-prefixed bitstring; returns ``(bits, new_offset)``."""
    if len(data) - offset < 4:
        raise ValueError("truncated bitstring header")
    (n,) = struct.unpack_from("<I", data, offset)
    nbytes = (n + 7) // 8
    start = offset + 4
    if len(data) - start < nbytes:
        raise ValueError("truncated bitstring body")
    return unpack(data[start:start + nbytes], n), start + nbytes


def to_hex(bits) -> str:
    return pack(bits).hex()


def from_hex(text: str, n: int | None = None) -> np.ndarray:
    raw = bytes.fromhex(text)
    return unpack(raw, len(raw) * 8 if n is None else n)


def words_to_bits(words: np.ndarray, width: int) -> np.ndarray:
    """Expand unsigned words (any shape) into little-endian bits on a new last axis."""
    words = np.asarray(words, dtype=np.uint64)
    shifts = np.arange(width, dtype=np.uint64)
    return ((words[..., None] >> shifts) & np.uint64(1)).astype(np.uint8)


def bits_to_words(bits: np.ndarray, width: int) -> np.ndarray:
    """Inverse of :func:`words_to_bits` over the last axis."""
    bits = np.asarray(bits, dtype=np.uint64)
    if bits.shape[-1] != width:
        raise ValueError("last axis must equal word width")
    shifts = np.arange(width, dtype=np.uint64)
    return np.bitwise_or.reduce(bits << shifts, axis=-1)
