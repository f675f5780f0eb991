"""Pseudorandom generators.

Two variants share the :class:`Prg` interface:

* ``fast``: SHA-256 in counter mode.  Used where nothing has to be proven
  about the expansion (view commitments inside the proof system).
* ``circuit-friendly``: a toy ARX permutation on four ``λ``-bit words, run in
  counter mode with a feed-forward.  Every protocol-level Naor commitment and
  every garbling table uses this variant, because the proof statements have
  to re-run it gate by gate; :func:`cf_prg_circuit` exports the matching
  :class:`~miniqot.circuit.BooleanCircuit`.

The ARX block on state ``(s0, s1, s2, s3)`` applies a ChaCha-style quarter
round twice and XORs the input back in.  Expansion block ``k`` for seed ``s``
starts from ``(s, k mod 2^λ, k >> λ, C)`` with a fixed constant ``C``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from . import bits as B
from ._backend import njit, use_numba
from .circuit import BooleanCircuit, CircuitBuilder

FAST = "fast"
CIRCUIT_FRIENDLY = "circuit-friendly"
QR_REPEATS = 2
_PI_FRAC = 0x243F6A8885A308D3


def rotations(width: int) -> tuple[int, int, int, int]:
    """ChaCha's (16, 12, 8, 7) rotation amounts scaled to ``width`` bits."""
    return tuple(max(1, width * k // 32) for k in (16, 12, 8, 7))


def block_constant(width: int) -> int:
    return _PI_FRAC & ((1 << width) - 1)


def _check_width(width: int) -> None:
    if not 4 <= width <= 32:
        raise ValueError(f"word width must be in [4, 32], got {width}")


# -- ARX block, three implementations that must agree bit for bit ----------

def arx_block_int(s0: int, s1: int, s2: int, s3: int, width: int) -> tuple[int, int, int, int]:
    """Scalar reference implementation on Python ints."""
    mask = (1 << width) - 1
    r1, r2, r3, r4 = rotations(width)

    def rotl(x, r):
        return ((x << r) | (x >> (width - r))) & mask

    a, b, c, d = s0, s1, s2, s3
    for _ in range(QR_REPEATS):
        a = (a + b) & mask
        d = rotl(d ^ a, r1)
        c = (c + d) & mask
        b = rotl(b ^ c, r2)
        a = (a + b) & mask
        d = rotl(d ^ a, r3)
        c = (c + d) & mask
        b = rotl(b ^ c, r4)
    return a ^ s0, b ^ s1, c ^ s2, d ^ s3


def _arx_np(s0, s1, s2, s3, width):
    mask = np.uint64((1 << width) - 1)
    r1, r2, r3, r4 = (np.uint64(r) for r in rotations(width))
    wd = np.uint64(width)

    def rotl(x, r):
        return ((x << r) | (x >> (wd - r))) & mask

    a, b, c, d = s0.copy(), s1.copy(), s2.copy(), s3.copy()
    for _ in range(QR_REPEATS):
        a = (a + b) & mask
        d = rotl(d ^ a, r1)
        c = (c + d) & mask
        b = rotl(b ^ c, r2)
        a = (a + b) & mask
        d = rotl(d ^ a, r3)
        c = (c + d) & mask
        b = rotl(b ^ c, r4)
    return np.stack([a ^ s0, b ^ s1, c ^ s2, d ^ s3], axis=-1)


@njit
def _arx_nb(s0, s1, s2, s3, width, r1, r2, r3, r4, repeats):
    n = s0.shape[0]
    out = np.empty((n, 4), dtype=np.uint64)
    mask = np.uint64((1 << width) - 1)
    wd = np.uint64(width)
    q1, q2, q3, q4 = np.uint64(r1), np.uint64(r2), np.uint64(r3), np.uint64(r4)
    for i in range(n):
        a, b, c, d = s0[i], s1[i], s2[i], s3[i]
        for _ in range(repeats):
            a = (a + b) & mask
            d ^= a
            d = ((d << q1) | (d >> (wd - q1))) & mask
            c = (c + d) & mask
            b ^= c
            b = ((b << q2) | (b >> (wd - q2))) & mask
            a = (a + b) & mask
            d ^= a
            d = ((d << q3) | (d >> (wd - q3))) & mask
            c = (c + d) & mask
            b ^= c
            b = ((b << q4) | (b >> (wd - q4))) & mask
        out[i, 0] = a ^ s0[i]
        out[i, 1] = b ^ s1[i]
        out[i, 2] = c ^ s2[i]
        out[i, 3] = d ^ s3[i]
    return out


def arx_block(s0, s1, s2, s3, width: int, backend: str | None = None) -> np.ndarray:
    """Vectorised ARX block over word arrays; returns shape ``(n, 4)`` uint64."""
    _check_width(width)
    arrs = np.broadcast_arrays(*(np.asarray(v, dtype=np.uint64) for v in (s0, s1, s2, s3)))
    arrs = [np.ascontiguousarray(a).reshape(-1) for a in arrs]
    if backend is None:
        backend = "numba" if use_numba() else "numpy"
    if backend == "numba":
        return _arx_nb(*arrs, width, *rotations(width), QR_REPEATS)
    return _arx_np(*arrs, width)


def arx_block_gates(cb: CircuitBuilder, words: list[list[int]]) -> list[list[int]]:
    """Emit the ARX block into ``cb``; words are little-endian wire lists."""
    width = len(words[0])
    r1, r2, r3, r4 = rotations(width)
    a, b, c, d = (list(w) for w in words)
    for _ in range(QR_REPEATS):
        a = cb.add_w(a, b)
        d = cb.rotl_w(cb.xor_w(d, a), r1)
        c = cb.add_w(c, d)
        b = cb.rotl_w(cb.xor_w(b, c), r2)
        a = cb.add_w(a, b)
        d = cb.rotl_w(cb.xor_w(d, a), r3)
        c = cb.add_w(c, d)
        b = cb.rotl_w(cb.xor_w(b, c), r4)
    return [cb.xor_w(x, y) for x, y in zip((a, b, c, d), words)]


# -- circuit-friendly expansion ---------------------------------------------

def cf_blocks(out_len: int, width: int) -> int:
    return -(-out_len // (4 * width))


def cf_expand_words(seeds, out_len: int, width: int, backend: str | None = None) -> np.ndarray:
    """Expand many seeds at once; ``seeds`` are ints < 2**width.

    Returns bits of shape ``(len(seeds), out_len)``.
    """
    seeds = np.asarray(seeds, dtype=np.uint64).reshape(-1)
    nblocks = cf_blocks(out_len, width)
    if nblocks > (1 << (2 * width)):
        raise ValueError("requested output too long for the counter space")
    k = np.arange(nblocks, dtype=np.uint64)
    mask = np.uint64((1 << width) - 1)
    s0 = np.repeat(seeds, nblocks)
    s1 = np.tile(k & mask, seeds.size)
    s2 = np.tile(k >> np.uint64(width), seeds.size)
    s3 = np.full(s0.size, block_constant(width), dtype=np.uint64)
    words = arx_block(s0, s1, s2, s3, width, backend)
    out = B.words_to_bits(words, width).reshape(seeds.size, nblocks * 4 * width)
    return out[:, :out_len]


def cf_expand(seed, out_len: int) -> np.ndarray:
    seed = B.as_bits(seed)
    _check_width(seed.size)
    return cf_expand_words([B.to_int(seed)], out_len, seed.size)[0]


def cf_expand_many(seeds: np.ndarray, out_len: int) -> np.ndarray:
    """Bit-matrix form of :func:`cf_expand_words`: seeds shape ``(N, λ)``."""
    seeds = np.asarray(seeds, dtype=np.uint8)
    width = seeds.shape[1]
    _check_width(width)
    return cf_expand_words(B.bits_to_words(seeds, width), out_len, width)


def cf_expand_gates(cb: CircuitBuilder, seed: list[int], out_len: int,
                    first_block: int = 0) -> list[int]:
    """Emit expansion gates for a seed given as wire handles."""
    width = len(seed)
    out: list[int] = []
    nblocks = cf_blocks(out_len, width)
    for k in range(first_block, first_block + nblocks):
        words = [
            list(seed),
            cb.const_word(k & ((1 << width) - 1), width),
            cb.const_word(k >> width, width),
            cb.const_word(block_constant(width), width),
        ]
        for w in arx_block_gates(cb, words):
            out.extend(w)
    return out[:out_len]


_circuit_cache: dict[tuple[int, int], BooleanCircuit] = {}


def cf_prg_circuit(seed_len: int, out_len: int) -> BooleanCircuit:
    """Gate-level description of the circuit-friendly expansion."""
    key = (seed_len, out_len)
    if key not in _circuit_cache:
        _check_width(seed_len)
        cb = CircuitBuilder(seed_len)
        outs = cf_expand_gates(cb, cb.inputs, out_len)
        _circuit_cache[key] = cb.build(outs)
    return _circuit_cache[key]


# -- fast expansion ----------------------------------------------------------

def fast_expand_bytes(key: bytes, nbytes: int, domain: bytes = b"prg") -> bytes:
    out = bytearray()
    ctr = 0
    while len(out) < nbytes:
        out += hashlib.sha256(domain + len(key).to_bytes(4, "little") + key
                              + ctr.to_bytes(8, "little")).digest()
        ctr += 1
    return bytes(out[:nbytes])


def fast_expand(seed, out_len: int) -> np.ndarray:
    seed = B.as_bits(seed)
    key = seed.size.to_bytes(4, "little") + B.pack(seed)
    raw = fast_expand_bytes(key, (out_len + 7) // 8)
    return B.unpack(raw, out_len)


@dataclass(frozen=True)
class Prg:
    """A length-``seed_len`` to length-``out_len`` generator."""

    variant: str
    seed_len: int
    out_len: int

    def __post_init__(self):
        if self.variant not in (FAST, CIRCUIT_FRIENDLY):
            raise ValueError(f"unknown PRG variant {self.variant!r}")
        if self.variant == CIRCUIT_FRIENDLY:
            _check_width(self.seed_len)

    def expand(self, seed) -> np.ndarray:
        seed = B.as_bits(seed)
        if seed.size != self.seed_len:
            raise ValueError(f"seed must be {self.seed_len} bits, got {seed.size}")
        if self.variant == FAST:
            return fast_expand(seed, self.out_len)
        return cf_expand(seed, self.out_len)

    def circuit(self) -> BooleanCircuit:
        if self.variant != CIRCUIT_FRIENDLY:
            raise ValueError("only the circuit-friendly variant exports a circuit")
        return cf_prg_circuit(self.seed_len, self.out_len)


def prg_expand(prg: Prg, seed) -> np.ndarray:
    return prg.expand(seed)
