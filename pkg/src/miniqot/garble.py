"""Seed-derandomised Yao garbling with point-and-permute.

The source circuit is lowered to binary XOR/AND gates over wires

* ``[0, m)``: evaluator inputs,
* ``[m, m+g)``: garbler inputs (their active labels ship inside the garbled
  circuit),
* ``m+g`` and ``m+g+1``: garbler-held constant-0 and constant-1 wires,
* then one wire per lowered gate.

NOT becomes XOR with the constant-1 wire, CONST gates are replaced by the
constant wires.  All labels are ``λ``-bit words derived from one seed by the
circuit-friendly PRG: expansion block ``k`` yields four words
``(A0, A1, B0, B1)`` giving the label pairs of wires ``2k`` and ``2k+1``; the
low bit of each label-1 word is forced to the complement of label 0's low
bit, so the low bit acts as the select bit.

Gate ``g`` with input labels ``(La, Lb)`` owns the row at position
``2·lsb(La) + lsb(Lb)``; the row is the first two words of
``ARX(La, Lb, g mod 2^λ, g >> λ)`` XORed with ``(L_out, 0)``.  The zero word
is an integrity tag: a decryption producing a non-zero tag is reported as an
evaluation failure rather than a wrong output.  Free-XOR is not used.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import bits as B
from .circuit import AND, CONST, NOT, XOR, BooleanCircuit
from .prg import arx_block, arx_block_int, cf_expand_words


class GarbleError(ValueError):
    pass


class EvaluationFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class Topology:
    """Binary-gate form of a circuit; public part of a garbled circuit."""

    n_eval: int
    n_garbler: int
    ops: np.ndarray      # XOR or AND
    a: np.ndarray
    b: np.ndarray
    outputs: np.ndarray

    @property
    def zero_wire(self) -> int:
        return self.n_eval + self.n_garbler

    @property
    def one_wire(self) -> int:
        return self.n_eval + self.n_garbler + 1

    @property
    def first_gate_wire(self) -> int:
        return self.n_eval + self.n_garbler + 2

    @property
    def n_gates(self) -> int:
        return int(self.ops.size)

    @property
    def n_wires(self) -> int:
        return self.first_gate_wire + self.n_gates

    def gate_value(self, g: int, x: int, y: int) -> int:
        return (x ^ y) if self.ops[g] == XOR else (x & y)


_topo_cache: dict[tuple, tuple[BooleanCircuit, Topology]] = {}
_TOPO_CACHE_MAX = 64


def lower(circuit: BooleanCircuit, n_garbler: int = 0) -> Topology:
    key = (id(circuit), n_garbler)
    hit = _topo_cache.get(key)
    if hit is not None and hit[0] is circuit:
        return hit[1]
    n_eval = circuit.n_inputs - n_garbler
    if n_eval < 0:
        raise GarbleError("more garbler inputs than circuit inputs")
    base = n_eval + n_garbler
    zero, one = base, base + 1
    mapping = np.empty(circuit.n_wires, dtype=np.int64)
    mapping[:base] = np.arange(base)
    ops, aa, bb = [], [], []
    nxt = base + 2
    for k, (op, a, b) in enumerate(zip(circuit.ops.tolist(), circuit.a.tolist(), circuit.b.tolist())):
        w = circuit.n_inputs + k
        if op == CONST:
            mapping[w] = one if a else zero
            continue
        if op == NOT:
            ops.append(XOR)
            aa.append(mapping[a])
            bb.append(one)
        else:
            ops.append(op)
            aa.append(mapping[a])
            bb.append(mapping[b])
        mapping[w] = nxt
        nxt += 1
    topo = Topology(n_eval, n_garbler, np.array(ops, dtype=np.uint8), np.array(aa, dtype=np.int64),
                    np.array(bb, dtype=np.int64), mapping[circuit.outputs])
    if len(_topo_cache) >= _TOPO_CACHE_MAX:
        _topo_cache.clear()
    _topo_cache[key] = (circuit, topo)
    return topo


@dataclass
class GarbledCircuit:
    lam: int
    topo: Topology
    tables: np.ndarray          # (n_gates, 4, 2) uint64
    garbler_labels: np.ndarray  # (n_garbler + 2,) active labels incl. constant wires
    decode: np.ndarray          # (n_outputs, 2) labels for output bit 0 / 1

    def serialize(self) -> bytes:
        t = self.topo
        head = struct.pack("<IIIII", self.lam, t.n_eval, t.n_garbler, t.n_gates, t.outputs.size)
        return (head + t.ops.astype(np.uint8).tobytes() + t.a.astype("<u4").tobytes()
                + t.b.astype("<u4").tobytes() + t.outputs.astype("<u4").tobytes()
                + self.tables.astype("<u8").tobytes() + self.garbler_labels.astype("<u8").tobytes()
                + self.decode.astype("<u8").tobytes())

    @classmethod
    def deserialize(cls, data: bytes) -> "GarbledCircuit":
        try:
            lam, ne, ng, n, no = struct.unpack_from("<IIIII", data, 0)
            pos = 20
            ops = np.frombuffer(data, np.uint8, n, pos).copy(); pos += n
            a = np.frombuffer(data, "<u4", n, pos).astype(np.int64); pos += 4 * n
            b = np.frombuffer(data, "<u4", n, pos).astype(np.int64); pos += 4 * n
            outs = np.frombuffer(data, "<u4", no, pos).astype(np.int64); pos += 4 * no
            tables = np.frombuffer(data, "<u8", 8 * n, pos).reshape(n, 4, 2).astype(np.uint64); pos += 64 * n
            gl = np.frombuffer(data, "<u8", ng + 2, pos).astype(np.uint64); pos += 8 * (ng + 2)
            dec = np.frombuffer(data, "<u8", 2 * no, pos).reshape(no, 2).astype(np.uint64); pos += 16 * no
        except (struct.error, ValueError) as exc:
            raise GarbleError(f"malformed garbled circuit: {exc}") from exc
        if pos != len(data):
            raise GarbleError("trailing bytes in garbled circuit")
        return cls(lam, Topology(ne, ng, ops, a, b, outs), tables, gl, dec)


def check_size(topo: Topology, lam: int) -> None:
    if topo.n_gates >= 1 << (2 * lam):
        raise GarbleError("circuit too large for the gate tweak space")
    if -(-topo.n_wires // 2) > 1 << (2 * lam):
        raise GarbleError("circuit too large for the label expansion")


def wire_labels(seed_word: int, n_wires: int, lam: int) -> np.ndarray:
    """Label pairs ``(n_wires, 2)`` for every wire, from one seed."""
    nblocks = -(-n_wires // 2)
    words = B.bits_to_words(cf_expand_words([seed_word], nblocks * 4 * lam, lam)[0]
                            .reshape(-1, lam), lam).reshape(nblocks * 2, 2)
    low0 = words[:, 0] & np.uint64(1)
    words[:, 1] = (words[:, 1] & ~np.uint64(1)) | (low0 ^ np.uint64(1))
    return words[:n_wires]


def row_pads(la: np.ndarray, lb: np.ndarray, gate_idx: np.ndarray, lam: int) -> np.ndarray:
    """First two ARX output words for each (La, Lb, gate) triple; shape (N, 2)."""
    g = np.asarray(gate_idx, dtype=np.uint64)
    mask = np.uint64((1 << lam) - 1)
    out = arx_block(la, lb, g & mask, g >> np.uint64(lam), lam)
    return out[:, :2]


def garb(circuit: BooleanCircuit, seed, garbler_bits=None, n_garbler: int | None = None):
    """Garble ``circuit`` deterministically from a ``λ``-bit seed.

    Returns ``(GarbledCircuit, e)`` where ``e`` has shape ``(n_eval, 2)``:
    the label pair of each evaluator input.
    """
    seed = B.as_bits(seed)
    lam = seed.size
    gbits = B.as_bits([] if garbler_bits is None else garbler_bits)
    if n_garbler is None:
        n_garbler = gbits.size
    if gbits.size != n_garbler:
        raise GarbleError("garbler input length mismatch")
    topo = lower(circuit, n_garbler)
    check_size(topo, lam)
    labels = wire_labels(B.to_int(seed), topo.n_wires, lam)
    return _garble_with_labels(topo, labels, gbits, lam), labels[: topo.n_eval].copy()


def _garble_with_labels(topo: Topology, labels: np.ndarray, gbits: np.ndarray, lam: int) -> GarbledCircuit:
    n = topo.n_gates
    gi = np.arange(n, dtype=np.uint64)
    out_w = topo.first_gate_wire + np.arange(n)
    tables = np.zeros((n, 4, 2), dtype=np.uint64)
    for alpha in (0, 1):
        for beta in (0, 1):
            la = labels[topo.a, alpha]
            lb = labels[topo.b, beta]
            val = np.where(topo.ops == XOR, alpha ^ beta, alpha & beta)
            lo = labels[out_w, val]
            pad = row_pads(la, lb, gi, lam)
            pos = 2 * (la & np.uint64(1)).astype(np.int64) + (lb & np.uint64(1)).astype(np.int64)
            tables[np.arange(n), pos, 0] = pad[:, 0] ^ lo
            tables[np.arange(n), pos, 1] = pad[:, 1]
    gwires = topo.n_eval + np.arange(topo.n_garbler)
    active = np.concatenate([labels[gwires, gbits.astype(np.int64)],
                             [labels[topo.zero_wire, 0], labels[topo.one_wire, 1]]]).astype(np.uint64)
    decode = labels[topo.outputs].copy()
    return GarbledCircuit(lam, topo, tables, active, decode)


def enc(e: np.ndarray, x) -> np.ndarray:
    x = B.as_bits(x)
    e = np.asarray(e, dtype=np.uint64)
    if x.size != e.shape[0]:
        raise GarbleError(f"expected {e.shape[0]} input bits, got {x.size}")
    return e[np.arange(x.size), x.astype(np.int64)]


def geval(gc: GarbledCircuit, xhat) -> np.ndarray:
    """Evaluate; raises :class:`EvaluationFailure` on an undecryptable row."""
    t = gc.topo
    xhat = [int(v) for v in np.asarray(xhat, dtype=np.uint64).reshape(-1)]
    if len(xhat) != t.n_eval:
        raise GarbleError(f"expected {t.n_eval} input labels, got {len(xhat)}")
    lam = gc.lam
    mask = (1 << lam) - 1
    wires = xhat + [int(v) for v in gc.garbler_labels]
    tables = gc.tables.tolist()
    for g, (a, b) in enumerate(zip(t.a.tolist(), t.b.tolist())):
        la, lb = wires[a], wires[b]
        p0, p1, _, _ = arx_block_int(la, lb, g & mask, g >> lam, lam)
        row = tables[g][2 * (la & 1) + (lb & 1)]
        if row[1] ^ p1:
            raise EvaluationFailure(f"gate {g}: no row decrypts under the given labels")
        wires.append(row[0] ^ p0)
    out = np.empty(t.outputs.size, dtype=np.uint8)
    for i, w in enumerate(t.outputs.tolist()):
        lbl = wires[w]
        if lbl == int(gc.decode[i, 0]):
            out[i] = 0
        elif lbl == int(gc.decode[i, 1]):
            out[i] = 1
        else:
            raise EvaluationFailure(f"output {i}: label matches neither decoding entry")
    return out


def garbsim(circuit: BooleanCircuit, y, rng: np.random.Generator, lam: int,
            n_garbler: int = 0) -> tuple[GarbledCircuit, np.ndarray]:
    """Simulated garbled circuit and input labels evaluating to ``y``.

    Only the topology of ``circuit`` is used.  One active label per wire is
    sampled; each gate's active row encrypts the active output label, the
    other three rows are uniform.
    """
    topo = lower(circuit, n_garbler)
    check_size(topo, lam)
    y = B.as_bits(y)
    if y.size != topo.outputs.size:
        raise GarbleError("output length mismatch")
    mask = (1 << lam) - 1
    active = rng.integers(0, 1 << lam, size=topo.n_wires, dtype=np.uint64)
    n = topo.n_gates
    gi = np.arange(n, dtype=np.uint64)
    tables = rng.integers(0, 1 << lam, size=(n, 4, 2), dtype=np.uint64)
    la, lb = active[topo.a], active[topo.b]
    pad = row_pads(la, lb, gi, lam)
    pos = 2 * (la & np.uint64(1)).astype(np.int64) + (lb & np.uint64(1)).astype(np.int64)
    out_w = topo.first_gate_wire + np.arange(n)
    tables[np.arange(n), pos, 0] = pad[:, 0] ^ active[out_w]
    tables[np.arange(n), pos, 1] = pad[:, 1]
    decode = np.zeros((topo.outputs.size, 2), dtype=np.uint64)
    for i, w in enumerate(topo.outputs.tolist()):
        other = int(rng.integers(0, 1 << lam)) & ~1 | ((int(active[w]) & 1) ^ 1)
        decode[i, y[i]] = active[w]
        decode[i, 1 - y[i]] = other & mask
    glabels = active[topo.n_eval: topo.first_gate_wire].copy()
    gc = GarbledCircuit(lam, topo, tables, glabels, decode)
    return gc, active[: topo.n_eval].copy()
