"""Batched boolean statements and their three-party in-the-head execution.

A :class:`Statement` is one big boolean circuit with a single output wire,
stored compactly as a list of :class:`Block` s.  Each block applies one small
*gadget* circuit to many lanes.  Gadget inputs come in named groups: secret
groups are read from the secret wire space (witness bits and outputs of
earlier blocks), public groups are constants known to prover and verifier.
Blocks flagged as checks contribute their output bit to a final AND tree whose
root is the statement's output.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .. import bits as B
from .._backend import use_numba
from ..circuit import AND, CONST, NOT, XOR, BooleanCircuit, CircuitBuilder
from . import kernels as K

CHUNK_WORDS_NUMBA = 32
CHUNK_WORDS_NUMPY = 512
SEED_BYTES = 16


class StatementError(ValueError):
    pass


# -- gadgets ------------------------------------------------------------------

@dataclass(frozen=True)
class Group:
    name: str
    width: int
    secret: bool


@dataclass
class Program:
    op: np.ndarray
    ra: np.ndarray
    rb: np.ndarray
    rd: np.ndarray
    n_sreg: int
    n_qreg: int
    in_sreg: np.ndarray
    in_qreg: np.ndarray
    out_reg: np.ndarray
    n_and: int


class Gadget:
    """A circuit whose inputs are split into named secret/public groups."""

    def __init__(self, key: str, circuit: BooleanCircuit, groups: list[Group]):
        if sum(g.width for g in groups) != circuit.n_inputs:
            raise StatementError(f"gadget {key}: group widths do not cover the inputs")
        self.key = key
        self.circuit = circuit
        self.groups = groups
        self.n_out = int(circuit.outputs.size)
        self.program = lower_program(circuit, groups)

    @property
    def n_and(self) -> int:
        return self.program.n_and

    def group(self, name: str) -> Group:
        for g in self.groups:
            if g.name == name:
                return g
        raise KeyError(name)


def lower_program(circuit: BooleanCircuit, groups: list[Group]) -> Program:
    """Classify wires as secret/public, drop dead gates, allocate registers."""
    n_in = circuit.n_inputs
    secret_in = np.concatenate([np.full(g.width, g.secret) for g in groups]) if groups else np.zeros(0, bool)
    ops = circuit.ops.tolist()
    aa = circuit.a.tolist()
    bb = circuit.b.tolist()
    n_w = circuit.n_wires

    live = np.zeros(n_w, dtype=bool)
    live[circuit.outputs] = True
    for k in range(len(ops) - 1, -1, -1):
        w = n_in + k
        if live[w] and ops[k] != CONST:
            live[aa[k]] = True
            if ops[k] in (XOR, AND):
                live[bb[k]] = True

    last_use = np.full(n_w, -1, dtype=np.int64)
    for k in range(len(ops)):
        if not live[n_in + k] or ops[k] == CONST:
            continue
        last_use[aa[k]] = k
        if ops[k] in (XOR, AND):
            last_use[bb[k]] = k
    last_use[circuit.outputs] = len(ops) + 1

    is_sec = np.zeros(n_w, dtype=bool)
    is_sec[:n_in] = secret_in
    reg = np.full(n_w, -1, dtype=np.int64)
    free_s: list[int] = []
    free_q: list[int] = []
    counts = [0, 0]

    def alloc(secret: bool) -> int:
        pool = free_s if secret else free_q
        if pool:
            return pool.pop()
        counts[0 if secret else 1] += 1
        return counts[0 if secret else 1] - 1

    def release(w: int, k: int):
        if w >= 0 and last_use[w] == k:
            (free_s if is_sec[w] else free_q).append(int(reg[w]))

    in_sreg, in_qreg = [], []
    for w in range(n_in):
        reg[w] = alloc(bool(is_sec[w]))
        (in_sreg if is_sec[w] else in_qreg).append(int(reg[w]))

    P_op, P_a, P_b, P_d = [], [], [], []
    n_and = 0
    for k in range(len(ops)):
        w = n_in + k
        if not live[w]:
            continue
        o, a, b = ops[k], aa[k], bb[k]
        if o == CONST:
            is_sec[w] = False
            ins = []
            code, ra_, rb_ = K.Q_CONST, a, 0
        elif o == NOT:
            is_sec[w] = is_sec[a]
            ins = [a]
            code, ra_, rb_ = (K.S_NOT if is_sec[a] else K.Q_NOT), reg[a], 0
        else:
            sa, sb = is_sec[a], is_sec[b]
            ins = [a, b]
            is_sec[w] = sa or sb
            if sa and sb:
                code = K.S_XOR if o == XOR else K.S_AND
                ra_, rb_ = reg[a], reg[b]
            elif sa or sb:
                s_w, p_w = (a, b) if sa else (b, a)
                code = K.S_XORP if o == XOR else K.S_ANDP
                ra_, rb_ = reg[s_w], reg[p_w]
            else:
                code = K.Q_XOR if o == XOR else K.Q_AND
                ra_, rb_ = reg[a], reg[b]
        for x in set(ins):
            release(x, k)
        reg[w] = alloc(bool(is_sec[w]))
        if code == K.S_AND:
            n_and += 1
        P_op.append(code)
        P_a.append(int(ra_))
        P_b.append(int(rb_))
        P_d.append(int(reg[w]))

    out_reg = []
    for w in circuit.outputs.tolist():
        if is_sec[w]:
            out_reg.append(int(reg[w]))
        else:
            counts[0] += 1
            r = counts[0] - 1
            P_op.append(K.S_FROMP)
            P_a.append(int(reg[w]))
            P_b.append(0)
            P_d.append(r)
            out_reg.append(r)
    i32 = lambda v: np.asarray(v, dtype=np.int32)  # noqa: E731
    return Program(i32(P_op), i32(P_a), i32(P_b), i32(P_d), counts[0], counts[1],
                   i32(in_sreg), i32(in_qreg), i32(out_reg), n_and)


# -- statements ---------------------------------------------------------------

@dataclass
class Block:
    gadget: Gadget
    n_lanes: int
    sgroups: np.ndarray      # (lanes, G_sec) int64 start indices
    gwidth: np.ndarray
    gcol: np.ndarray
    pub_words: np.ndarray    # (n_pub, W) uint64
    out_base: int
    tape_off: int = 0

    @property
    def words(self) -> int:
        return (self.n_lanes + 63) // 64

    @property
    def tape_words(self) -> int:
        return self.gadget.n_and * self.words


@dataclass
class Statement:
    kind: str
    n_witness: int
    n_secret: int
    blocks: list[Block]
    root: int
    layout: dict[str, tuple[int, tuple]] = field(default_factory=dict)
    public: dict = field(default_factory=dict)
    _digest: bytes | None = None

    @property
    def tape_words(self) -> int:
        return sum(b.tape_words for b in self.blocks)

    @property
    def n_and(self) -> int:
        return sum(b.gadget.n_and * b.n_lanes for b in self.blocks)

    @property
    def root_view_word(self) -> int:
        """View word holding the final AND; lane 0 is its low bit."""
        last = self.blocks[-1]
        return last.tape_off + (last.gadget.n_and - 1) * last.words

    def digest(self) -> bytes:
        if self._digest is None:
            h = hashlib.sha256(self.kind.encode())
            h.update(np.array([self.n_witness, self.n_secret, self.root], dtype="<i8").tobytes())
            for b in self.blocks:
                h.update(b.gadget.key.encode())
                h.update(np.array([b.n_lanes, b.out_base], dtype="<i8").tobytes())
                h.update(np.ascontiguousarray(b.sgroups, dtype="<i8").tobytes())
                h.update(np.ascontiguousarray(b.pub_words, dtype="<u8").tobytes())
            self._digest = h.digest()
        return self._digest

    def assemble(self, parts: dict) -> np.ndarray:
        w = np.zeros(self.n_witness, dtype=np.uint8)
        for name, (off, shape) in self.layout.items():
            if name not in parts:
                raise StatementError(f"missing witness part {name!r}")
            v = np.asarray(parts[name], dtype=np.uint8)
            if v.shape != shape:
                raise StatementError(f"witness part {name!r} has shape {v.shape}, expected {shape}")
            size = int(np.prod(shape, dtype=np.int64))
            w[off:off + size] = v.reshape(-1)
        return w

    def evaluate(self, witness) -> int:
        """Plain evaluation of the output wire."""
        witness = _check_witness(self, witness)
        S = np.zeros(self.n_secret, dtype=np.uint8)
        S[: self.n_witness] = witness
        execute(self, K.CLEAR, S, np.array([1], dtype=np.uint8))
        return int(S[self.root] & 1)


def _check_witness(stmt: Statement, witness) -> np.ndarray:
    witness = np.asarray(witness, dtype=np.uint8).reshape(-1)
    if witness.size != stmt.n_witness:
        raise StatementError(f"witness must have {stmt.n_witness} bits, got {witness.size}")
    if witness.size and witness.max() > 1:
        raise StatementError("witness entries must be bits")
    return witness


def _pack_pub(lanes: int, arr: np.ndarray, width: int) -> np.ndarray:
    words = (lanes + 63) // 64
    arr = np.asarray(arr, dtype=np.uint8)
    if arr.ndim == 1:
        if arr.size != width:
            raise StatementError("broadcast public group has the wrong width")
        return np.where(arr[:, None] == 1, K.ONES, np.uint64(0)) * np.ones((1, words), dtype=np.uint64)
    if arr.shape != (lanes, width):
        raise StatementError(f"public group shape {arr.shape} != {(lanes, width)}")
    return K._pack_cols(arr, words)


class StatementBuilder:
    """Assemble a :class:`Statement`: witness parts first, then blocks."""

    def __init__(self, kind: str, public: dict | None = None):
        self.kind = kind
        self.public = dict(public or {})
        self.n_witness = 0
        self.layout: dict[str, tuple[int, tuple]] = {}
        self.blocks: list[Block] = []
        self._next = None
        self._checks: list[np.ndarray] = []

    def witness(self, name: str, shape) -> np.ndarray:
        if self._next is not None:
            raise StatementError("witness parts must be declared before blocks")
        shape = tuple(np.atleast_1d(shape).tolist()) if not isinstance(shape, tuple) else shape
        size = int(np.prod(shape, dtype=np.int64))
        self.layout[name] = (self.n_witness, shape)
        idx = np.arange(self.n_witness, self.n_witness + size, dtype=np.int64).reshape(shape)
        self.n_witness += size
        return idx

    def add(self, gadget: Gadget, lanes: int, sec: dict, pub: dict | None = None,
            check: bool = False) -> np.ndarray:
        """Append a block; returns output wire indices of shape ``(lanes, n_out)``."""
        pub = pub or {}
        if self._next is None:
            self._next = self.n_witness
        if lanes == 0:
            return np.zeros((0, gadget.n_out), dtype=np.int64)
        starts, widths, cols, pubs = [], [], [], []
        col = 0
        for g in gadget.groups:
            if g.secret:
                s = np.broadcast_to(np.asarray(sec[g.name], dtype=np.int64).reshape(-1), (lanes,))
                starts.append(s)
                widths.append(g.width)
                cols.append(col)
                col += g.width
            else:
                pubs.append(_pack_pub(lanes, pub[g.name], g.width))
        extra = set(sec) - {g.name for g in gadget.groups if g.secret}
        extra |= set(pub) - {g.name for g in gadget.groups if not g.secret}
        if extra:
            raise StatementError(f"unknown input groups {sorted(extra)} for gadget {gadget.key}")
        sgroups = np.ascontiguousarray(np.stack(starts, axis=1)) if starts else np.zeros((lanes, 0), np.int64)
        if sgroups.size and (sgroups.min() < 0):
            raise StatementError("negative secret index")
        words = (lanes + 63) // 64
        pub_words = np.concatenate(pubs, axis=0) if pubs else np.zeros((0, words), np.uint64)
        base = self._next
        self._next += lanes * gadget.n_out
        blk = Block(gadget, lanes, sgroups, np.array(widths, dtype=np.int64),
                    np.array(cols, dtype=np.int64), np.ascontiguousarray(pub_words), base)
        self.blocks.append(blk)
        out = base + np.arange(lanes * gadget.n_out, dtype=np.int64).reshape(lanes, gadget.n_out)
        if check:
            if gadget.n_out != 1:
                raise StatementError("check blocks must have one output")
            self._checks.append(out[:, 0])
        return out

    def require(self, wires: np.ndarray) -> None:
        """Add already-computed wires to the set that must all equal 1."""
        self._checks.append(np.asarray(wires, dtype=np.int64).reshape(-1))

    def finish(self) -> Statement:
        if self._next is None:
            self._next = self.n_witness
        checks = np.concatenate(self._checks) if self._checks else np.zeros(0, np.int64)
        if checks.size == 0:
            raise StatementError("statement has no checks")
        and2 = and2_gadget()
        level = checks if checks.size > 1 else np.repeat(checks, 2)
        while level.size > 1:
            half = level.size // 2
            out = self.add(and2, half, {"a": level[0:2 * half:2], "b": level[1:2 * half:2]})
            level = np.concatenate([out[:, 0], level[2 * half:]])
        off = 0
        for b in self.blocks:
            b.tape_off = off
            off += b.tape_words
        return Statement(self.kind, self.n_witness, self._next, self.blocks, int(level[0]),
                         self.layout, self.public)


_gadget_cache: dict[str, Gadget] = {}


def cached_gadget(key: str, build) -> Gadget:
    g = _gadget_cache.get(key)
    if g is None:
        circuit, groups = build()
        g = _gadget_cache[key] = Gadget(key, circuit, groups)
    return g


def and2_gadget() -> Gadget:
    def build():
        cb = CircuitBuilder(2)
        return cb.build([cb.and_(0, 1)]), [Group("a", 1, True), Group("b", 1, True)]
    return cached_gadget("and2", build)


# -- execution ----------------------------------------------------------------

def _kernel(backend: str | None):
    if backend is None:
        backend = "numba" if use_numba() else "numpy"
    if backend == "numba":
        return K.run_block_nb, CHUNK_WORDS_NUMBA
    return K.run_block_np, CHUNK_WORDS_NUMPY


def execute(stmt: Statement, mode: int, S: np.ndarray, is_p0: np.ndarray,
            tape: np.ndarray | None = None, view_in: np.ndarray | None = None,
            view_out: np.ndarray | None = None, backend: str | None = None) -> None:
    run, chunk = _kernel(backend)
    P = is_p0.size
    if tape is None:
        tape = np.zeros((P, 1), dtype=np.uint64)
    if view_in is None:
        view_in = np.zeros(1, dtype=np.uint64)
    if view_out is None:
        view_out = np.zeros((P, 1), dtype=np.uint64)
    for b in stmt.blocks:
        pr = b.gadget.program
        run(mode, is_p0, pr.op, pr.ra, pr.rb, pr.rd, pr.n_sreg, pr.n_qreg, pr.in_sreg,
            pr.in_qreg, pr.out_reg, S, b.sgroups, b.gwidth, b.gcol, b.pub_words, b.out_base,
            b.n_lanes, tape, b.tape_off, view_in, view_out, chunk)


# -- per-party randomness -----------------------------------------------------

def _stream(seed: bytes, purpose: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int.from_bytes(seed, "little"), spawn_key=(purpose,))
    return np.random.Generator(np.random.PCG64(ss))


def party_tape(seed: bytes, words: int) -> np.ndarray:
    return _stream(seed, 2).bit_generator.random_raw(max(words, 1)).astype(np.uint64)


def party_share(seed: bytes, n: int) -> np.ndarray:
    raw = _stream(seed, 1).bit_generator.random_raw(max(1, (n + 63) // 64)).astype("<u8")
    return np.unpackbits(raw.view(np.uint8), bitorder="little", count=n)


def view_digest(party: int, seed: bytes, x2: np.ndarray | None, view: np.ndarray) -> bytes:
    h = hashlib.sha256(b"view" + bytes([party]) + seed)
    if x2 is not None:
        h.update(B.pack(x2))
    h.update(np.ascontiguousarray(view, dtype="<u8").tobytes())
    return h.digest()


@dataclass
class ProverRound:
    seeds: list[bytes]
    x2: np.ndarray
    views: np.ndarray        # (3, T)
    y: np.ndarray            # (3,) output shares


def prove_round(stmt: Statement, witness: np.ndarray, rng: np.random.Generator,
                flip_party: int | None = None, backend: str | None = None) -> ProverRound:
    """Run the three simulated parties on XOR shares of ``witness``.

    ``flip_party`` is the cheating hook: that party's final AND output (and
    therefore its output share) is flipped after the honest computation.
    """
    witness = _check_witness(stmt, witness)
    seeds = [rng.bytes(SEED_BYTES) for _ in range(3)]
    x0 = party_share(seeds[0], stmt.n_witness)
    x1 = party_share(seeds[1], stmt.n_witness)
    x2 = witness ^ x0 ^ x1
    T = stmt.tape_words
    tape = np.stack([party_tape(s, T) for s in seeds])
    views = np.zeros((3, max(T, 1)), dtype=np.uint64)
    S = np.zeros(stmt.n_secret, dtype=np.uint8)
    S[: stmt.n_witness] = x0 | (x1 << 1) | (x2 << 2)
    execute(stmt, K.PROVE, S, np.array([1, 0, 0], dtype=np.uint8), tape, None, views, backend)
    y = np.array([(S[stmt.root] >> p) & 1 for p in range(3)], dtype=np.uint8)
    if flip_party is not None:
        views[flip_party, stmt.root_view_word] ^= np.uint64(1)
        y[flip_party] ^= 1
    return ProverRound(seeds, x2, views, y)


def recompute_pair(stmt: Statement, e: int, seed_e: bytes, seed_e1: bytes,
                   x2: np.ndarray | None, view_e1: np.ndarray,
                   backend: str | None = None) -> tuple[np.ndarray, int, int]:
    """Verifier-side re-execution of parties ``e`` and ``e+1``.

    Returns ``(view_e, y_e, y_e1)``.
    """
    e1 = (e + 1) % 3
    shares = []
    for party, seed in ((e, seed_e), (e1, seed_e1)):
        if party == 2:
            if x2 is None or x2.size != stmt.n_witness:
                raise StatementError("missing third input share")
            shares.append(np.asarray(x2, dtype=np.uint8))
        else:
            shares.append(party_share(seed, stmt.n_witness))
    T = stmt.tape_words
    tape = np.stack([party_tape(seed_e, T), party_tape(seed_e1, T)])
    view_out = np.zeros((1, max(T, 1)), dtype=np.uint64)
    view_in = np.ascontiguousarray(view_e1, dtype=np.uint64)
    if view_in.size != max(T, 1):
        raise StatementError("opened view has the wrong length")
    S = np.zeros(stmt.n_secret, dtype=np.uint8)
    S[: stmt.n_witness] = shares[0] | (shares[1] << 1)
    is_p0 = np.array([e == 0, e1 == 0], dtype=np.uint8)
    execute(stmt, K.VERIFY, S, is_p0, tape, view_in, view_out, backend)
    return view_out[0], int(S[stmt.root] & 1), int((S[stmt.root] >> 1) & 1)
