"""Bit-sliced interpreters for lowered gadget programs.

A gadget program runs over a batch of lanes packed 64 per ``uint64`` word.
Secret registers hold one word row per simulated party; public registers hold
one row shared by everybody.  Three modes:

* ``CLEAR``: one party, AND is a plain AND (witness self-test).
* ``PROVE``: three parties with XOR shares; AND gates consume tape words and
  record every party's output word in its view.
* ``VERIFY``: two consecutive parties ``(e, e+1)``; party ``e`` is recomputed
  and its AND outputs written to ``view_out``; party ``e+1``'s AND outputs
  are read from ``view_in``.

The secret wire space ``S`` is a byte array whose bit ``p`` is local party
``p``'s share of that wire.  Secret inputs are gathered from ``S`` as groups
of consecutive wires (start index per lane, fixed width per group); outputs
are scattered back lane-major starting at ``out_base``.
"""

from __future__ import annotations

import numpy as np

from .._backend import njit

S_XOR, S_XORP, S_NOT, S_AND, S_ANDP, Q_XOR, Q_AND, Q_NOT, Q_CONST, S_FROMP = range(10)
CLEAR, PROVE, VERIFY = 0, 1, 2
ONES = np.uint64(0xFFFFFFFFFFFFFFFF)


@njit
def run_block_nb(mode, is_p0, op, ra, rb, rd, n_sreg, n_qreg, in_sreg, in_qreg, out_reg,
                 S, sgroups, gwidth, gcol, pub_words, out_base, n_lanes,
                 tape, tape_off, view_in, view_out, chunk_words):
    P = is_p0.shape[0]
    W_total = (n_lanes + 63) // 64
    n_out = out_reg.shape[0]
    R = np.zeros((max(n_sreg, 1), P, chunk_words), dtype=np.uint64)
    Q = np.zeros((max(n_qreg, 1), chunk_words), dtype=np.uint64)
    ones = np.uint64(0xFFFFFFFFFFFFFFFF)
    zero = np.uint64(0)
    one = np.uint64(1)
    for w0 in range(0, W_total, chunk_words):
        cw = min(chunk_words, W_total - w0)
        lane0 = w0 * 64
        lanes = min(n_lanes - lane0, cw * 64)
        for c in range(in_sreg.shape[0]):
            for p in range(P):
                for j in range(cw):
                    R[in_sreg[c], p, j] = zero
        for g in range(sgroups.shape[1]):
            width = gwidth[g]
            cb = gcol[g]
            for l in range(lanes):
                start = sgroups[lane0 + l, g]
                wj = l >> 6
                bit = np.uint64(l & 63)
                for t in range(width):
                    v = S[start + t]
                    reg = in_sreg[cb + t]
                    for p in range(P):
                        R[reg, p, wj] |= np.uint64((v >> p) & 1) << bit
        for c in range(in_qreg.shape[0]):
            for j in range(cw):
                Q[in_qreg[c], j] = pub_words[c, w0 + j]
        and_k = 0
        for k in range(op.shape[0]):
            o = op[k]
            a = ra[k]
            b = rb[k]
            d = rd[k]
            if o == 0:
                for p in range(P):
                    for j in range(cw):
                        R[d, p, j] = R[a, p, j] ^ R[b, p, j]
            elif o == 1:
                for p in range(P):
                    if is_p0[p]:
                        for j in range(cw):
                            R[d, p, j] = R[a, p, j] ^ Q[b, j]
                    else:
                        for j in range(cw):
                            R[d, p, j] = R[a, p, j]
            elif o == 2:
                for p in range(P):
                    if is_p0[p]:
                        for j in range(cw):
                            R[d, p, j] = R[a, p, j] ^ ones
                    else:
                        for j in range(cw):
                            R[d, p, j] = R[a, p, j]
            elif o == 3:
                base = tape_off + and_k * W_total + w0
                if mode == 0:
                    for j in range(cw):
                        R[d, 0, j] = R[a, 0, j] & R[b, 0, j]
                elif mode == 1:
                    for j in range(cw):
                        a0 = R[a, 0, j]
                        a1 = R[a, 1, j]
                        a2 = R[a, 2, j]
                        b0 = R[b, 0, j]
                        b1 = R[b, 1, j]
                        b2 = R[b, 2, j]
                        t0 = tape[0, base + j]
                        t1 = tape[1, base + j]
                        t2 = tape[2, base + j]
                        z0 = (a0 & b0) ^ (a1 & b0) ^ (a0 & b1) ^ t0 ^ t1
                        z1 = (a1 & b1) ^ (a2 & b1) ^ (a1 & b2) ^ t1 ^ t2
                        z2 = (a2 & b2) ^ (a0 & b2) ^ (a2 & b0) ^ t2 ^ t0
                        R[d, 0, j] = z0
                        R[d, 1, j] = z1
                        R[d, 2, j] = z2
                        view_out[0, base + j] = z0
                        view_out[1, base + j] = z1
                        view_out[2, base + j] = z2
                else:
                    for j in range(cw):
                        a0 = R[a, 0, j]
                        a1 = R[a, 1, j]
                        b0 = R[b, 0, j]
                        b1 = R[b, 1, j]
                        z0 = (a0 & b0) ^ (a1 & b0) ^ (a0 & b1) ^ tape[0, base + j] ^ tape[1, base + j]
                        R[d, 0, j] = z0
                        R[d, 1, j] = view_in[base + j]
                        view_out[0, base + j] = z0
                and_k += 1
            elif o == 4:
                for p in range(P):
                    for j in range(cw):
                        R[d, p, j] = R[a, p, j] & Q[b, j]
            elif o == 5:
                for j in range(cw):
                    Q[d, j] = Q[a, j] ^ Q[b, j]
            elif o == 6:
                for j in range(cw):
                    Q[d, j] = Q[a, j] & Q[b, j]
            elif o == 7:
                for j in range(cw):
                    Q[d, j] = Q[a, j] ^ ones
            elif o == 8:
                v = ones if a == 1 else zero
                for j in range(cw):
                    Q[d, j] = v
            else:
                for p in range(P):
                    if is_p0[p]:
                        for j in range(cw):
                            R[d, p, j] = Q[a, j]
                    else:
                        for j in range(cw):
                            R[d, p, j] = zero
        for oi in range(n_out):
            reg = out_reg[oi]
            for l in range(lanes):
                wj = l >> 6
                bit = np.uint64(l & 63)
                v = 0
                for p in range(P):
                    v |= int((R[reg, p, wj] >> bit) & one) << p
                S[out_base + (lane0 + l) * n_out + oi] = v


def _pack_cols(bits: np.ndarray, words: int) -> np.ndarray:
    """(lanes, cols) 0/1 -> (cols, words) uint64."""
    lanes, cols = bits.shape
    padded = np.zeros((cols, words * 64), dtype=np.uint8)
    padded[:, :lanes] = bits.T
    return np.packbits(padded, axis=1, bitorder="little").view("<u8").reshape(cols, words)


def _unpack_rows(words: np.ndarray, lanes: int) -> np.ndarray:
    """(rows, words) uint64 -> (lanes, rows) 0/1."""
    raw = np.ascontiguousarray(words).view(np.uint8).reshape(words.shape[0], -1)
    return np.unpackbits(raw, axis=1, bitorder="little", count=lanes).T


def run_block_np(mode, is_p0, op, ra, rb, rd, n_sreg, n_qreg, in_sreg, in_qreg, out_reg,
                 S, sgroups, gwidth, gcol, pub_words, out_base, n_lanes,
                 tape, tape_off, view_in, view_out, chunk_words):
    """Pure-numpy implementation with the same semantics as :func:`run_block_nb`."""
    P = is_p0.shape[0]
    W_total = (n_lanes + 63) // 64
    n_out = out_reg.shape[0]
    p0 = np.asarray(is_p0, dtype=bool)
    for w0 in range(0, W_total, chunk_words):
        cw = min(chunk_words, W_total - w0)
        lane0 = w0 * 64
        lanes = min(n_lanes - lane0, cw * 64)
        R = np.zeros((max(n_sreg, 1), P, cw), dtype=np.uint64)
        Q = np.zeros((max(n_qreg, 1), cw), dtype=np.uint64)
        for g in range(sgroups.shape[1]):
            width = int(gwidth[g])
            idx = sgroups[lane0:lane0 + lanes, g][:, None] + np.arange(width)
            vals = S[idx]
            regs = in_sreg[gcol[g]:gcol[g] + width]
            for p in range(P):
                R[regs, p, :] = _pack_cols((vals >> p) & 1, cw)
        if in_qreg.size:
            Q[in_qreg] = pub_words[:, w0:w0 + cw]
        and_k = 0
        for o, a, b, d in zip(op.tolist(), ra.tolist(), rb.tolist(), rd.tolist()):
            if o == S_XOR:
                R[d] = R[a] ^ R[b]
            elif o == S_XORP:
                R[d] = R[a]
                R[d, p0] ^= Q[b]
            elif o == S_NOT:
                R[d] = R[a]
                R[d, p0] ^= ONES
            elif o == S_AND:
                base = tape_off + and_k * W_total + w0
                if mode == CLEAR:
                    R[d] = R[a] & R[b]
                elif mode == PROVE:
                    x, y = R[a], R[b]
                    x1, y1 = np.roll(x, -1, axis=0), np.roll(y, -1, axis=0)
                    t = tape[:, base:base + cw]
                    z = (x & y) ^ (x1 & y) ^ (x & y1) ^ t ^ np.roll(t, -1, axis=0)
                    R[d] = z
                    view_out[:, base:base + cw] = z
                else:
                    x, y = R[a], R[b]
                    t = tape[:, base:base + cw]
                    z0 = (x[0] & y[0]) ^ (x[1] & y[0]) ^ (x[0] & y[1]) ^ t[0] ^ t[1]
                    R[d, 0] = z0
                    R[d, 1] = view_in[base:base + cw]
                    view_out[0, base:base + cw] = z0
                and_k += 1
            elif o == S_ANDP:
                R[d] = R[a] & Q[b]
            elif o == Q_XOR:
                Q[d] = Q[a] ^ Q[b]
            elif o == Q_AND:
                Q[d] = Q[a] & Q[b]
            elif o == Q_NOT:
                Q[d] = Q[a] ^ ONES
            elif o == Q_CONST:
                Q[d] = ONES if a == 1 else np.uint64(0)
            else:
                R[d] = 0
                R[d, p0] = Q[a]
        if n_out:
            acc = np.zeros((lanes, n_out), dtype=np.uint8)
            for p in range(P):
                acc |= (_unpack_rows(R[out_reg, p, :], lanes) << p).astype(np.uint8)
            S[out_base + lane0 * n_out: out_base + (lane0 + lanes) * n_out] = acc.reshape(-1)
