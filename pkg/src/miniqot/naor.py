"""Naor bit and string commitments over the circuit-friendly PRG.

A bit commitment is ``c = G(r) XOR m·rho`` with ``G`` expanding ``λ`` bits to
``3λ``.  A string commitment to ``m_1..m_L`` uses one seed for the whole
string: ``c = G(r, 3λL) XOR (m_1·rho || ... || m_L·rho)``.  With ``L = 1``
this is exactly the bit commitment.  Restricting a string commitment to a
message index does not give an independent commitment; protocols that need
per-message opening commit each message under its own seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bits as B
from .prg import cf_expand_many


def _check(rho, r) -> tuple[np.ndarray, np.ndarray, int]:
    rho, r = B.as_bits(rho), B.as_bits(r)
    lam = r.size
    if rho.size != 3 * lam:
        raise ValueError(f"rho must be 3λ={3 * lam} bits, got {rho.size}")
    return rho, r, lam


def message_mask(rho: np.ndarray, msg: np.ndarray) -> np.ndarray:
    """``m_1·rho || ... || m_L·rho`` for bit messages ``msg``."""
    return (np.asarray(msg, dtype=np.uint8)[..., :, None] & rho).reshape(*np.shape(msg)[:-1], -1)


def commit_string(rho, msg, r) -> np.ndarray:
    rho, r, lam = _check(rho, r)
    msg = B.as_bits(msg)
    pad = cf_expand_many(r[None, :], 3 * lam * msg.size)[0]
    return pad ^ message_mask(rho, msg)


def verify_string(rho, c, msg, r) -> bool:
    try:
        expect = commit_string(rho, msg, r)
    except ValueError:
        return False
    c = np.asarray(c, dtype=np.uint8).reshape(-1)
    return c.shape == expect.shape and bool(np.array_equal(c, expect))


def naor_commit(rho, m: int, r) -> np.ndarray:
    if m not in (0, 1):
        raise ValueError("committed value must be a bit")
    return commit_string(rho, [m], r)


def naor_verify(rho, c, m: int, r) -> bool:
    if m not in (0, 1):
        return False
    return verify_string(rho, c, [m], r)


def commit_many(rho, msgs: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    """Row-wise string commitments: ``msgs`` (N, L), ``seeds`` (N, λ) -> (N, 3λL)."""
    rho = B.as_bits(rho)
    msgs = np.asarray(msgs, dtype=np.uint8)
    seeds = np.asarray(seeds, dtype=np.uint8)
    lam = seeds.shape[1]
    if rho.size != 3 * lam:
        raise ValueError("rho must be 3λ bits")
    pads = cf_expand_many(seeds, 3 * lam * msgs.shape[1])
    return pads ^ message_mask(rho, msgs)


def verify_many(rho, cs: np.ndarray, msgs: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    return np.all(commit_many(rho, msgs, seeds) == cs, axis=1)


@dataclass
class NaorCommitment:
    rho: np.ndarray
    c: np.ndarray
    m: int
    r: np.ndarray

    @classmethod
    def create(cls, rho, m: int, r) -> "NaorCommitment":
        return cls(B.as_bits(rho), naor_commit(rho, m, r), m, B.as_bits(r))

    def verify(self) -> bool:
        return naor_verify(self.rho, self.c, self.m, self.r)


def ambiguous_rho(rho, lam: int) -> bool:
    """True iff some pair of seeds opens one value to both bits under ``rho``.

    That is, ``G(r) XOR G(r') == rho`` for some ``r, r'``.  Exhaustive over all
    ``2**λ`` seeds, so only usable for small ``λ``.
    """
    table = all_expansions(lam)
    keys = _rows_as_ints(table)
    target = keys ^ _rows_as_ints(B.as_bits(rho)[None, :])[0]
    return bool(np.isin(target, keys).any())


_expansion_cache: dict[int, np.ndarray] = {}


def all_expansions(lam: int) -> np.ndarray:
    """``G(r)`` for every ``λ``-bit seed ``r`` (row ``r``)."""
    if lam not in _expansion_cache:
        if lam > 16:
            raise ValueError("exhaustive expansion table limited to λ <= 16")
        from .prg import cf_expand_words

        _expansion_cache[lam] = cf_expand_words(np.arange(1 << lam), 3 * lam, lam)
    return _expansion_cache[lam]


def _rows_as_ints(rows: np.ndarray) -> np.ndarray:
    """Pack each ``≤64``-bit row into a uint64 key."""
    rows = np.asarray(rows, dtype=np.uint64)
    if rows.shape[1] > 64:
        raise ValueError("rows longer than 64 bits")
    shifts = np.arange(rows.shape[1], dtype=np.uint64)
    return np.bitwise_or.reduce(rows << shifts, axis=1)
