"""Toeplitz universal hashing for privacy amplification.

The ``ℓ × n`` matrix is determined by ``n + ℓ - 1`` descriptor bits:
``T[i][j] = desc[i - j + n - 1]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import bits as B


@dataclass(frozen=True)
class UniversalHash:
    desc: np.ndarray
    in_len: int
    out_len: int

    def __post_init__(self):
        desc = B.as_bits(self.desc)
        object.__setattr__(self, "desc", desc)
        if desc.size != self.in_len + self.out_len - 1:
            raise ValueError("Toeplitz descriptor must have n + ℓ - 1 bits")

    def matrix(self) -> np.ndarray:
        if self.out_len == 0:
            return np.zeros((0, self.in_len), dtype=np.uint8)
        win = sliding_window_view(self.desc, self.in_len)[: self.out_len]
        return np.ascontiguousarray(win[:, ::-1])

    def apply(self, x) -> np.ndarray:
        x = B.as_bits(x)
        if x.size != self.in_len:
            raise ValueError(f"hash input must be {self.in_len} bits, got {x.size}")
        prod = self.matrix().astype(np.int64) @ x.astype(np.int64)
        return (prod & 1).astype(np.uint8)

    def serialize(self) -> bytes:
        return (self.in_len.to_bytes(4, "little") + self.out_len.to_bytes(4, "little")
                + B.serialize(self.desc))

    @classmethod
    def deserialize(cls, data: bytes) -> "UniversalHash":
        if len(data) < 8:
            raise ValueError("truncated hash descriptor")
        n = int.from_bytes(data[:4], "little")
        ell = int.from_bytes(data[4:8], "little")
        desc, _ = B.deserialize(data, 8)
        return cls(desc, n, ell)


def uh_sample(rng: np.random.Generator, in_len: int, out_len: int) -> UniversalHash:
    if out_len < 1 or in_len < 1:
        raise ValueError("hash lengths must be positive")
    return UniversalHash(B.random_bits(rng, in_len + out_len - 1), in_len, out_len)


def uh_apply(f: UniversalHash, x) -> np.ndarray:
    return f.apply(x)
