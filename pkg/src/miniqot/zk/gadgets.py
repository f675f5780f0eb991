"""Gadget circuits used to express commitment and garbling checks.

Every gadget is built once per parameter set and cached.  Label pairs are
laid out as ``2λ`` consecutive secret wires: label 0 then label 1, each
little-endian.
"""

from __future__ import annotations

from ..circuit import BooleanCircuit, CircuitBuilder
from ..prg import arx_block_gates, block_constant, cf_expand_gates
from .engine import Gadget, Group, cached_gadget


def _split(wires: list[int], *widths: int) -> list[list[int]]:
    out, pos = [], 0
    for w in widths:
        out.append(wires[pos:pos + w])
        pos += w
    return out


def commit_gadget(lam: int, L: int, msg_secret: bool) -> Gadget:
    """``[G(seed, 3λL) XOR (m_j·rho)_j == c]`` for an ``L``-bit message."""

    def build():
        n = lam + L + 3 * lam + 3 * lam * L
        cb = CircuitBuilder(n)
        seed, msg, rho, c = _split(cb.inputs, lam, L, 3 * lam, 3 * lam * L)
        pad = cf_expand_gates(cb, seed, 3 * lam * L)
        eq = []
        for j in range(L):
            for i in range(3 * lam):
                k = j * 3 * lam + i
                v = cb.xor(cb.xor(pad[k], cb.and_(msg[j], rho[i])), c[k])
                eq.append(cb.not_(v))
        groups = [Group("seed", lam, True), Group("msg", L, msg_secret),
                  Group("rho", 3 * lam, False), Group("c", 3 * lam * L, False)]
        return cb.build([cb.and_tree(eq)]), groups

    return cached_gadget(f"commit/{lam}/{L}/{int(msg_secret)}", build)


def labelgen_gadget(lam: int) -> Gadget:
    """Label pairs of wires ``2k`` and ``2k+1`` from a garbling seed and block counter."""

    def build():
        cb = CircuitBuilder(3 * lam)
        seed, klo, khi = _split(cb.inputs, lam, lam, lam)
        words = arx_block_gates(cb, [seed, klo, khi, cb.const_word(block_constant(lam), lam)])
        for w in (1, 3):
            words[w] = [cb.not_(words[w - 1][0])] + words[w][1:]
        out = [b for w in words for b in w]
        groups = [Group("seed", lam, True), Group("ctr", 2 * lam, False)]
        return cb.build(out), groups

    return cached_gadget(f"labelgen/{lam}", build)


def _eq_words(cb: CircuitBuilder, x: list[int], y: list[int]) -> list[int]:
    return cb.equal_bits(x, y)


def row_gadget(lam: int, is_and: bool) -> Gadget:
    """Check one gate's four table rows against its wire label pairs.

    Inputs: label pairs of both input wires and the output wire (secret),
    the gate tweak and the four published rows (public).  The published row
    position ``2·lsb(La)+lsb(Lb)`` depends on secret label bits, so the rows
    are routed through a two-level conditional swap before comparison.
    """

    def build():
        n = 6 * lam + 2 * lam + 8 * lam
        cb = CircuitBuilder(n)
        a0, a1, b0, b1, o0, o1, glo, ghi = _split(cb.inputs[: 8 * lam], *([lam] * 8))
        rows = _split(cb.inputs[8 * lam:], *([2 * lam] * 4))
        la, lb, lo = (a0, a1), (b0, b1), (o0, o1)
        pa, pb = a0[0], b0[0]
        # first level is a swap by a secret bit over public rows (no AND cost)
        v = []
        for r0, r1 in ((rows[0], rows[1]), (rows[2], rows[3])):
            x, y = [], []
            for p, q in zip(r0, r1):
                d = cb.and_(pb, cb.xor(p, q))
                x.append(cb.xor(p, d))
                y.append(cb.xor(q, d))
            v.extend([x, y])
        top, bot = v[0] + v[1], v[2] + v[3]
        x, y = [], []
        for p, q in zip(top, bot):
            d = cb.and_(pa, cb.xor(p, q))
            x.append(cb.xor(p, d))
            y.append(cb.xor(q, d))
        routed = _split(x + y, *([2 * lam] * 4))
        eq = []
        for alpha in (0, 1):
            for beta in (0, 1):
                val = (alpha & beta) if is_and else (alpha ^ beta)
                p0, p1, _, _ = arx_block_gates(cb, [la[alpha], lb[beta], glo, ghi])
                enc = cb.xor_w(p0, lo[val]) + p1
                eq.extend(_eq_words(cb, enc, routed[2 * alpha + beta]))
        groups = [Group("la", 2 * lam, True), Group("lb", 2 * lam, True), Group("lo", 2 * lam, True),
                  Group("tweak", 2 * lam, False), Group("rows", 8 * lam, False)]
        return cb.build([cb.and_tree(eq)]), groups

    return cached_gadget(f"row/{lam}/{int(is_and)}", build)


def select_gadget(lam: int, v_secret: bool) -> Gadget:
    """``[published label == pair[v]]`` for a garbler input wire."""

    def build():
        cb = CircuitBuilder(3 * lam + 1)
        l0, l1, v, pub = _split(cb.inputs, lam, lam, 1, lam)
        sel = [cb.mux(v[0], p, q) for p, q in zip(l0, l1)]
        groups = [Group("pair", 2 * lam, True), Group("v", 1, v_secret), Group("label", lam, False)]
        return cb.build([cb.and_tree(_eq_words(cb, sel, pub))]), groups

    return cached_gadget(f"select/{lam}/{int(v_secret)}", build)


def pair_eq_gadget(lam: int) -> Gadget:
    """``[pair == published pair]`` (output decoding entries)."""

    def build():
        cb = CircuitBuilder(4 * lam)
        sec, pub = _split(cb.inputs, 2 * lam, 2 * lam)
        groups = [Group("pair", 2 * lam, True), Group("pub", 2 * lam, False)]
        return cb.build([cb.and_tree(_eq_words(cb, sec, pub))]), groups

    return cached_gadget(f"paireq/{lam}", build)


def circuit_gadget(circuit: BooleanCircuit, key: str) -> Gadget:
    """Whole-witness gadget for an arbitrary single-output circuit."""
    if circuit.outputs.size != 1:
        raise ValueError("statement circuits must have exactly one output")
    return cached_gadget(f"circuit/{key}", lambda: (circuit, [Group("w", circuit.n_inputs, True)]))
