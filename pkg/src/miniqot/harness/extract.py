"""Exhaustive opening search for Naor commitments (small λ only).

For each commitment row the search tries every seed ``r`` and keeps the
message strings ``m`` with ``c = G(r, 3λL) ⊕ (m_1·ρ ∥ … ∥ m_L·ρ)``.  A row
is ``ok`` with exactly one such message, ``ambiguous`` with several and
``no-opening`` with none.  Every reported opening is re-checked with
:func:`miniqot.naor.verify_string`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import bits as B
from ..naor import verify_string
from ..prg import cf_expand_words

MAX_LAM = 12
OK, AMBIGUOUS, NO_OPENING = "ok", "ambiguous", "no-opening"


@dataclass
class Extraction:
    """Per-row verdicts; ``messages`` rows are valid only where ``status`` is ``ok``."""

    status: list[str]
    messages: np.ndarray
    openings: list[list[tuple[np.ndarray, np.ndarray]]] = field(repr=False)

    @property
    def unique(self) -> bool:
        return all(s == OK for s in self.status)


def _keys(blocks: np.ndarray) -> np.ndarray:
    """Pack the last axis (≤ 64 bits) into integers."""
    shifts = np.arange(blocks.shape[-1], dtype=np.uint64)
    return np.bitwise_or.reduce(blocks.astype(np.uint64) << shifts, axis=-1)


def brute_force_extract(rho, commitments, lam: int) -> Extraction:
    """Search all ``2^λ`` seeds for every row of ``commitments`` (shape ``(k, 3λL)``)."""
    if not 1 <= lam <= MAX_LAM:
        raise ValueError(f"brute-force extraction needs 1 <= λ <= {MAX_LAM}")
    rho = B.as_bits(rho)
    cs = np.atleast_2d(np.asarray(commitments, dtype=np.uint8))
    if rho.size != 3 * lam or cs.shape[1] == 0 or cs.shape[1] % (3 * lam):
        raise ValueError("commitment rows must be 3λL bits with |ρ| = 3λ")
    k, L = cs.shape[0], cs.shape[1] // (3 * lam)
    seeds = np.arange(1 << lam)
    table = _keys(cf_expand_words(seeds, 3 * lam * L, lam).reshape(seeds.size, L, 3 * lam))
    rho_key = _keys(rho[None, :])[0]
    ckeys = _keys(cs.reshape(k, L, 3 * lam))

    status, openings = [], []
    messages = np.zeros((k, L), dtype=np.uint8)
    for i in range(k):
        zero = table == ckeys[i][None, :]
        one = table == (ckeys[i] ^ rho_key)[None, :]
        fits = np.flatnonzero(np.all(zero | one, axis=1))
        found: dict[bytes, tuple[np.ndarray, np.ndarray]] = {}
        for r in fits:
            # with ρ = 0 a block fits both ways; enumerate both messages
            options = [np.array([0], np.uint8) if z and not o else np.array([1], np.uint8) if o and not z
                       else np.array([0, 1], np.uint8) for z, o in zip(zero[r], one[r])]
            for m in np.array(np.meshgrid(*options, indexing="ij")).reshape(L, -1).T:
                m = m.astype(np.uint8)
                found.setdefault(m.tobytes(), (m, B.from_int(int(r), lam)))
        opened = list(found.values())
        for m, r in opened:
            if not verify_string(rho, cs[i], m, r):
                raise AssertionError("brute-force opening failed verification")
        openings.append(opened)
        if not opened:
            status.append(NO_OPENING)
        elif len(opened) == 1:
            status.append(OK)
            messages[i] = opened[0][0]
        else:
            status.append(AMBIGUOUS)
    return Extraction(status, messages, openings)
