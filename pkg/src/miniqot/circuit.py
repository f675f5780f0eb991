"""Gate-list boolean circuits.

A :class:`BooleanCircuit` has ``n_inputs`` input wires numbered
``0 .. n_inputs-1``; gate ``k`` drives wire ``n_inputs + k``.  Gates are
XOR, AND (binary), NOT (unary) and CONST (``a`` holds the value).  Gates may
only read earlier wires, so the list order is a topological order.

:class:`CircuitBuilder` produces circuits with constant folding and
structural hashing, and offers word-level helpers (ripple-carry add,
rotation) used by the ARX generator and the proof statements.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import njit, use_numba

XOR, AND, NOT, CONST = 0, 1, 2, 3
OP_NAMES = {XOR: "XOR", AND: "AND", NOT: "NOT", CONST: "CONST"}


class MalformedCircuit(ValueError):
    pass


@dataclass(frozen=True)
class BooleanCircuit:
    n_inputs: int
    ops: np.ndarray
    a: np.ndarray
    b: np.ndarray
    outputs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ops", np.asarray(self.ops, dtype=np.uint8))
        object.__setattr__(self, "a", np.asarray(self.a, dtype=np.int32))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=np.int32))
        object.__setattr__(self, "outputs", np.asarray(self.outputs, dtype=np.int32))
        self.validate()

    @property
    def n_gates(self) -> int:
        return int(self.ops.size)

    @property
    def n_wires(self) -> int:
        return self.n_inputs + self.n_gates

    @property
    def n_and(self) -> int:
        return int(np.count_nonzero(self.ops == AND))

    def validate(self) -> None:
        n = self.ops.size
        if not (self.a.size == self.b.size == n):
            raise MalformedCircuit("gate arrays differ in length")
        if n and self.ops.max() > CONST:
            raise MalformedCircuit("unknown gate opcode")
        limit = self.n_inputs + np.arange(n, dtype=np.int64)
        binary = (self.ops == XOR) | (self.ops == AND)
        unary = self.ops == NOT
        if np.any(binary & ((self.a < 0) | (self.a >= limit) | (self.b < 0) | (self.b >= limit))):
            raise MalformedCircuit("binary gate reads a later or invalid wire")
        if np.any(unary & ((self.a < 0) | (self.a >= limit))):
            raise MalformedCircuit("NOT gate reads a later or invalid wire")
        const = self.ops == CONST
        if np.any(const & ((self.a < 0) | (self.a > 1))):
            raise MalformedCircuit("CONST gate value must be 0 or 1")
        if self.outputs.size and (self.outputs.min() < 0 or self.outputs.max() >= self.n_wires):
            raise MalformedCircuit("output references a missing wire")

    def gate_list(self) -> list[tuple[str, int, int]]:
        return [(OP_NAMES[int(o)], int(x), int(y)) for o, x, y in zip(self.ops, self.a, self.b)]


def _eval_packed_py(ops, a, b, n_inputs, vals):
    # vals: (n_wires, words) uint64, inputs already loaded
    ones = np.uint64(0xFFFFFFFFFFFFFFFF)
    for k in range(ops.shape[0]):
        w = n_inputs + k
        op = ops[k]
        if op == 0:
            vals[w] = vals[a[k]] ^ vals[b[k]]
        elif op == 1:
            vals[w] = vals[a[k]] & vals[b[k]]
        elif op == 2:
            vals[w] = vals[a[k]] ^ ones
        else:
            vals[w] = ones if a[k] == 1 else np.uint64(0)
    return vals


@njit
def _eval_packed_nb(ops, a, b, n_inputs, vals):
    ones = np.uint64(0xFFFFFFFFFFFFFFFF)
    zero = np.uint64(0)
    words = vals.shape[1]
    for k in range(ops.shape[0]):
        w = n_inputs + k
        op = ops[k]
        if op == 0:
            for j in range(words):
                vals[w, j] = vals[a[k], j] ^ vals[b[k], j]
        elif op == 1:
            for j in range(words):
                vals[w, j] = vals[a[k], j] & vals[b[k], j]
        elif op == 2:
            for j in range(words):
                vals[w, j] = vals[a[k], j] ^ ones
        else:
            v = ones if a[k] == 1 else zero
            for j in range(words):
                vals[w, j] = v
    return vals


def pack_lanes(bits: np.ndarray) -> np.ndarray:
    """(batch, n) 0/1 matrix -> (n, words) uint64 with lane k in bit k."""
    batch, n = bits.shape
    words = max(1, (batch + 63) // 64)
    padded = np.zeros((n, words * 64), dtype=np.uint8)
    padded[:, :batch] = bits.T
    return np.packbits(padded, axis=1, bitorder="little").view("<u8").reshape(n, words)


def unpack_lanes(words: np.ndarray, batch: int) -> np.ndarray:
    """Inverse of :func:`pack_lanes`; returns (batch, n)."""
    raw = np.ascontiguousarray(words).view(np.uint8).reshape(words.shape[0], -1)
    return np.unpackbits(raw, axis=1, bitorder="little", count=batch).T


def eval_circuit(circuit: BooleanCircuit, x, backend: str | None = None) -> np.ndarray:
    """Evaluate on one input (shape ``(n,)``) or a batch (shape ``(batch, n)``)."""
    x = np.asarray(x, dtype=np.uint8)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != circuit.n_inputs:
        raise ValueError(f"expected {circuit.n_inputs} input bits, got {x.shape[1]}")
    if x.size and x.max() > 1:
        raise ValueError("inputs must be bits")
    batch = x.shape[0]
    packed = pack_lanes(x)
    vals = np.zeros((circuit.n_wires, packed.shape[1]), dtype=np.uint64)
    vals[: circuit.n_inputs] = packed
    if backend is None:
        backend = "numba" if use_numba() else "numpy"
    kernel = _eval_packed_nb if backend == "numba" else _eval_packed_py
    kernel(circuit.ops, circuit.a, circuit.b, circuit.n_inputs, vals)
    out = unpack_lanes(vals[circuit.outputs], batch)
    return out[0] if single else out


def truth_table_eval(circuit: BooleanCircuit, x) -> np.ndarray:
    """Straightforward per-gate interpreter, used as an independent oracle."""
    x = [int(v) for v in np.asarray(x).reshape(-1)]
    if len(x) != circuit.n_inputs:
        raise ValueError("wrong input length")
    wires = list(x)
    for op, a, b in circuit.gate_list():
        if op == "XOR":
            wires.append(wires[a] ^ wires[b])
        elif op == "AND":
            wires.append(wires[a] & wires[b])
        elif op == "NOT":
            wires.append(1 - wires[a])
        else:
            wires.append(a)
    return np.array([wires[o] for o in circuit.outputs], dtype=np.uint8)


ZERO = -1
ONE = -2


class CircuitBuilder:
    """Incremental circuit construction with folding of constants.

    Wire handles are non-negative ints; the constants are :data:`ZERO` and
    :data:`ONE`.  Constants only become gates if they reach an output.
    """

    def __init__(self, n_inputs: int):
        self.n_inputs = n_inputs
        self._ops: list[int] = []
        self._a: list[int] = []
        self._b: list[int] = []
        self._cache: dict[tuple[int, int, int], int] = {}

    @property
    def inputs(self) -> list[int]:
        return list(range(self.n_inputs))

    def _emit(self, op: int, a: int, b: int = 0) -> int:
        key = (op, a, b)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        wire = self.n_inputs + len(self._ops)
        self._ops.append(op)
        self._a.append(a)
        self._b.append(b)
        self._cache[key] = wire
        return wire

    @staticmethod
    def const(bit: int) -> int:
        return ONE if bit else ZERO

    def not_(self, a: int) -> int:
        if a == ZERO:
            return ONE
        if a == ONE:
            return ZERO
        return self._emit(NOT, a)

    def xor(self, a: int, b: int) -> int:
        if a == ZERO:
            return b
        if b == ZERO:
            return a
        if a == ONE:
            return self.not_(b)
        if b == ONE:
            return self.not_(a)
        if a == b:
            return ZERO
        if a > b:
            a, b = b, a
        return self._emit(XOR, a, b)

    def and_(self, a: int, b: int) -> int:
        if a == ZERO or b == ZERO:
            return ZERO
        if a == ONE:
            return b
        if b == ONE:
            return a
        if a == b:
            return a
        if a > b:
            a, b = b, a
        return self._emit(AND, a, b)

    def or_(self, a: int, b: int) -> int:
        return self.xor(self.xor(a, b), self.and_(a, b))

    def mux(self, sel: int, if0: int, if1: int) -> int:
        return self.xor(if0, self.and_(sel, self.xor(if0, if1)))

    # word helpers; words are little-endian lists of wire handles

    def const_word(self, value: int, width: int) -> list[int]:
        return [self.const((value >> i) & 1) for i in range(width)]

    def xor_w(self, x: list[int], y: list[int]) -> list[int]:
        return [self.xor(p, q) for p, q in zip(x, y)]

    def add_w(self, x: list[int], y: list[int]) -> list[int]:
        """Ripple-carry addition modulo 2**width (one AND per carried bit)."""
        out = []
        carry = ZERO
        width = len(x)
        for i in range(width):
            t1 = self.xor(x[i], carry)
            out.append(self.xor(t1, y[i]))
            if i + 1 < width:
                t2 = self.xor(y[i], carry)
                carry = self.xor(self.and_(t1, t2), carry)
        return out

    @staticmethod
    def rotl_w(x: list[int], r: int) -> list[int]:
        r %= len(x)
        return x[-r:] + x[:-r] if r else list(x)

    def and_tree(self, wires: list[int]) -> int:
        layer = list(wires)
        if not layer:
            return ONE
        while len(layer) > 1:
            nxt = [self.and_(layer[i], layer[i + 1]) for i in range(0, len(layer) - 1, 2)]
            if len(layer) % 2:
                nxt.append(layer[-1])
            layer = nxt
        return layer[0]

    def equal_bits(self, x: list[int], y: list[int]) -> list[int]:
        return [self.not_(self.xor(p, q)) for p, q in zip(x, y)]

    def build(self, outputs: list[int]) -> BooleanCircuit:
        outs = []
        for w in outputs:
            if w in (ZERO, ONE):
                # constants are materialised only when observed
                key = (CONST, 1 if w == ONE else 0, 0)
                w = self._emit(CONST, key[1], 0)
            outs.append(w)
        return BooleanCircuit(
            self.n_inputs,
            np.array(self._ops, dtype=np.uint8),
            np.array(self._a, dtype=np.int32),
            np.array(self._b, dtype=np.int32),
            np.array(outs, dtype=np.int32),
        )


def random_circuit(rng: np.random.Generator, n_inputs: int, n_gates: int,
                   n_outputs: int = 1) -> BooleanCircuit:
    """Uniformly random well-formed gate list (used by tests and the harness)."""
    ops, a, b = [], [], []
    for k in range(n_gates):
        limit = n_inputs + k
        op = int(rng.choice([XOR, AND, NOT, XOR, AND, CONST], p=None))
        if op == CONST:
            a.append(int(rng.integers(0, 2)))
            b.append(0)
        else:
            a.append(int(rng.integers(0, limit)))
            b.append(int(rng.integers(0, limit)) if op != NOT else 0)
        ops.append(op)
    n_wires = n_inputs + n_gates
    lo = max(0, n_wires - max(n_outputs, 4))
    outputs = rng.integers(lo, n_wires, size=n_outputs)
    return BooleanCircuit(n_inputs, ops, a, b, outputs)
