"""Verifiable conditional disclosure of secrets for Naor-commitment statements.

A statement is ``x = (ρ, c, b)`` and a witness ``w`` is a ``λ``-bit seed;
``R(x, w) = 1`` iff ``c = com_ρ(b; w)``.  The sender garbles ``2λ`` copies of
``G_{x,μ}`` (evaluator input ``w``, garbler input ``μ``), commits to every
input label and to ``μ``, transfers labels with their commitment coins by
parallel OT and proves consistency in zero knowledge.  The receiver opens a
random subset ``Λ`` of the instances with random choice strings
(cut-and-choose) and evaluates the lowest-index unopened instance whose
labels all verify.

Frames (layer ``cds``): PREAMBLE, STATEMENT, the parallel-OT sub-protocol,
GARBLED, then the ZK sub-protocol.  The OT comes first so that a simulator
playing the sender can read the receiver's choices before it garbles.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from . import bits as B
from .bbcs import ParallelOt
from .circuit import BooleanCircuit, CircuitBuilder
from .garble import EvaluationFailure, GarbledCircuit, garb, geval, lower
from .naor import commit_many, commit_string, verify_string
from .prg import cf_expand_gates
from .transport import codec
from .zk.protocol import zk_prove, zk_verify
from .zk.statements import cds_consistency

LAYER = "cds"
MAX_SECRET_BITS = 1 << 14


@dataclass(frozen=True)
class CdsStatement:
    """``x = (ρ, c, b)``: ``c`` should be a Naor commitment to bit ``b`` under ``ρ``."""

    rho: np.ndarray
    c: np.ndarray
    b: int

    def __post_init__(self):
        object.__setattr__(self, "rho", B.as_bits(self.rho))
        object.__setattr__(self, "c", B.as_bits(self.c))
        if self.b not in (0, 1):
            raise ValueError("claimed bit must be 0 or 1")
        if self.rho.size == 0 or self.rho.size % 3 or self.c.size != self.rho.size:
            raise ValueError("need |rho| = |c| = 3λ")

    @property
    def lam(self) -> int:
        return self.rho.size // 3

    def holds(self, w) -> bool:
        return verify_string(self.rho, self.c, [self.b], w)

    def to_wire(self) -> dict:
        return {"rho": self.rho, "c": self.c, "b": int(self.b)}

    @classmethod
    def from_wire(cls, body) -> "CdsStatement":
        return cls(body["rho"], body["c"], int(body["b"]))

    def __eq__(self, other):
        return (isinstance(other, CdsStatement) and self.b == other.b
                and np.array_equal(self.rho, other.rho) and np.array_equal(self.c, other.c))

    def __hash__(self):
        return hash((self.rho.tobytes(), self.c.tobytes(), self.b))


@lru_cache(maxsize=16)
def _relation_circuit(rho: bytes, c: bytes, b: int, n_secret: int) -> BooleanCircuit:
    rho_bits = np.frombuffer(rho, dtype=np.uint8)
    c_bits = np.frombuffer(c, dtype=np.uint8)
    lam = rho_bits.size // 3
    cb = CircuitBuilder(lam + n_secret)
    w, mu = cb.inputs[:lam], cb.inputs[lam:]
    pad = cf_expand_gates(cb, w, 3 * lam)
    eq = [cb.not_(cb.xor(p, cb.const(int(c_bits[i]) ^ (b & int(rho_bits[i])))))
          for i, p in enumerate(pad)]
    ok = cb.and_tree(eq)
    return cb.build([ok] + [cb.and_(m, ok) for m in mu])


def relation_circuit(x: CdsStatement, n_secret: int) -> BooleanCircuit:
    """``G_{x,μ}``: inputs ``w`` then ``μ``; outputs ``[R(x,w)]`` then ``μ_k ∧ R(x,w)``."""
    return _relation_circuit(x.rho.tobytes(), x.c.tobytes(), int(x.b), n_secret)


@dataclass
class CdsProof:
    """The sender's special output: the secret and the coins of ``c*``."""

    mu: np.ndarray
    rstar: np.ndarray


@dataclass
class CdsSenderOutput:
    proof: CdsProof
    rho: np.ndarray
    cstar: np.ndarray


@dataclass
class CdsResult:
    """Receiver output; ``mu is None`` stands for ⊥."""

    x: CdsStatement
    mu: np.ndarray | None
    rho: np.ndarray
    cstar: np.ndarray
    instance: int


@dataclass
class CdsTranscript:
    """The public part of a CDS run that :func:`cds_ver` needs."""

    rho: np.ndarray
    x: CdsStatement
    cstar: np.ndarray


def _ot_inputs(labels: np.ndarray, rlab: np.ndarray, lam: int) -> np.ndarray:
    """Per (instance, wire): ``(label_0 ∥ coin_0, label_1 ∥ coin_1)``, shape (2λ·m, 2, 2λ)."""
    lab_bits = B.words_to_bits(labels, lam)
    return np.concatenate([lab_bits, rlab], axis=-1).reshape(-1, 2, 2 * lam)


@dataclass
class GarbledBatch:
    """Sender-side material for one CDS run: instances, labels and commitments."""

    lam: int
    rho: np.ndarray
    mu: np.ndarray
    topo: object
    gammas: np.ndarray
    gcs: list
    labels: np.ndarray
    rlab: np.ndarray
    clab: np.ndarray
    rstar: np.ndarray
    cstar: np.ndarray

    def ot_inputs(self) -> np.ndarray:
        return _ot_inputs(self.labels, self.rlab, self.lam)

    def garbled_frame(self) -> dict:
        return {
            "tables": np.stack([gc.tables for gc in self.gcs]),
            "glabels": np.stack([gc.garbler_labels for gc in self.gcs]),
            "decode": np.stack([gc.decode for gc in self.gcs]),
            "cstar": self.cstar,
            "clab": self.clab,
        }

    @cached_property
    def statement(self):
        return cds_consistency(self.lam, self.rho, self.topo, self.gcs, self.cstar, self.clab)

    def witness(self):
        return self.statement.assemble({"gamma": self.gammas, "mu": self.mu, "rstar": self.rstar,
                                          "rlab": self.rlab})


def garble_instances(ctx, x: CdsStatement, mu, rho) -> GarbledBatch:
    """Garble ``2λ`` copies of ``G_{x,μ}`` and commit to their labels and to ``μ``."""
    rng, lam = ctx.rng, ctx.lam
    mu = B.as_bits(mu)
    n_inst, m = 2 * lam, lam
    circ = relation_circuit(x, mu.size)
    topo = lower(circ, mu.size)
    gammas = B.random_bits(rng, n_inst * lam).reshape(n_inst, lam)
    gcs, labels = [], []
    for i in range(n_inst):
        gc, e = garb(circ, gammas[i], mu, mu.size)
        gcs.append(gc)
        labels.append(e)
    labels = np.stack(labels)  # (2λ, m, 2)
    rlab = B.random_bits(rng, n_inst * m * 2 * lam).reshape(n_inst, m, 2, lam)
    clab = commit_many(rho, B.words_to_bits(labels, lam).reshape(-1, lam), rlab.reshape(-1, lam))
    rstar = B.random_bits(rng, lam)
    cstar = commit_string(rho, mu, rstar)
    return GarbledBatch(lam, rho, mu, topo, gammas, gcs, labels, rlab, clab, rstar, cstar)


def cds_send(ctx, x: CdsStatement, mu, ot: ParallelOt = ParallelOt()):
    """Sender party; returns :class:`CdsSenderOutput` (proof ``π = (μ, r*)``)."""
    sess, lam = ctx.sess, ctx.lam
    mu = B.as_bits(mu)
    if x.lam != lam:
        raise ValueError("statement security parameter does not match the context")
    with sess.layer(LAYER):
        rho = B.as_bits((yield from sess.recv("PREAMBLE")))
        if rho.size != 3 * lam:
            ctx.abort("cds: malformed preamble")
        sess.send("STATEMENT", x.to_wire())

        st = garble_instances(ctx, x, mu, rho)
        secrets = ctx.hook("cds.ot-inputs", st.ot_inputs(), labels=st.labels, coins=st.rlab)
        yield from ot.send(ctx, secrets)
        sess.send("GARBLED", st.garbled_frame())
        yield from zk_prove(ctx, st.statement, st.witness(), rho=rho)
    return CdsSenderOutput(CdsProof(mu, st.rstar), rho, st.cstar)


def _parse_garbled(body, lam: int, n_inst: int):
    tables = np.asarray(body["tables"], dtype=np.uint64)
    glabels = np.asarray(body["glabels"], dtype=np.uint64)
    decode = np.asarray(body["decode"], dtype=np.uint64)
    cstar = B.as_bits(body["cstar"])
    clab = np.asarray(body["clab"], dtype=np.uint8)
    if tables.ndim != 4 or tables.shape[0] != n_inst or tables.shape[2:] != (4, 2):
        raise ValueError("garbled tables have the wrong shape")
    if glabels.ndim != 2 or glabels.shape[0] != n_inst or not 2 <= glabels.shape[1] <= MAX_SECRET_BITS + 2:
        raise ValueError("garbler labels have the wrong shape")
    n_mu = glabels.shape[1] - 2
    if decode.shape != (n_inst, n_mu + 1, 2):
        raise ValueError("decoding table has the wrong shape")
    if cstar.size != 3 * lam * max(n_mu, 1) or clab.shape != (n_inst * lam * 2, 3 * lam * lam):
        raise ValueError("commitments have the wrong shape")
    return tables, glabels, decode, cstar, clab, n_mu


def cds_receive(ctx, w, ot: ParallelOt = ParallelOt()):
    """Receiver party with witness ``w``; returns :class:`CdsResult` or aborts with err1/err2."""
    sess, rng, lam = ctx.sess, ctx.rng, ctx.lam
    w = B.as_bits(w)
    if w.size != lam:
        raise ValueError(f"witness must have {lam} bits")
    n_inst, m = 2 * lam, lam
    with sess.layer(LAYER):
        rho = B.random_bits(rng, 3 * lam)
        sess.send("PREAMBLE", rho)
        try:
            x = CdsStatement.from_wire((yield from sess.recv("STATEMENT")))
        except (KeyError, TypeError, ValueError):
            ctx.abort("cds: malformed statement")
        if x.lam != lam:
            ctx.abort("cds: statement has the wrong security parameter")
        cut = ctx.hook("cds.cut", B.random_bits(rng, n_inst)).astype(bool)
        sigma = np.where(cut[:, None], B.random_bits(rng, n_inst * m).reshape(n_inst, m), w[None, :])
        sigma = np.asarray(ctx.hook("cds.choices", sigma, cut=cut), dtype=np.uint8).reshape(n_inst, m)
        got = np.asarray((yield from ot.receive(ctx, sigma.reshape(-1))), dtype=np.uint8)
        got = got.reshape(n_inst, m, 2 * lam)
        lab_t, coin_t = got[..., :lam], got[..., lam:]

        try:
            tables, glabels, decode, cstar, clab, n_mu = _parse_garbled(
                (yield from sess.recv("GARBLED")), lam, n_inst)
            topo = lower(relation_circuit(x, n_mu), n_mu)
            if tables.shape[1] != topo.n_gates or n_mu == 0:
                raise ValueError("garbled circuit does not match the statement")
        except (KeyError, TypeError, ValueError):
            ctx.abort("cds: malformed garbled circuits")
        gcs = [GarbledCircuit(lam, topo, tables[i], glabels[i], decode[i]) for i in range(n_inst)]

        stmt = cds_consistency(lam, rho, topo, gcs, cstar, clab)
        yield from zk_verify(ctx, stmt, rho=rho)

        expect = clab.reshape(n_inst, m, 2, -1)[np.arange(n_inst)[:, None], np.arange(m)[None, :], sigma]
        recomputed = commit_many(rho, lab_t.reshape(-1, lam), coin_t.reshape(-1, lam))
        ok = np.all(recomputed.reshape(n_inst, m, -1) == expect, axis=-1).all(axis=1)
        if np.any(cut & ~ok):
            ctx.abort("cds: err1")
        good = np.flatnonzero(~cut & ok)
        if good.size == 0:
            ctx.abort("cds: err2")
        i = int(good[0])
        try:
            out = geval(gcs[i], B.bits_to_words(lab_t[i], lam))
        except EvaluationFailure:
            ctx.abort("cds: evaluation failed")
    mu_out = out[1:].copy() if out[0] else None
    return CdsResult(x, mu_out, rho, cstar, i)


def cds_transcript(records: list[dict], layer: str | None = None) -> CdsTranscript | None:
    """Pull ``(ρ, x, c*)`` out of recorded frames; ``None`` if any is missing."""
    found = {}
    for r in records:
        path = r.get("layer", "")
        leaf = path.rsplit("/", 1)[-1]
        if (layer is not None and path != layer) or not leaf.startswith(LAYER + "#"):
            continue
        if r.get("msg") in ("PREAMBLE", "STATEMENT", "GARBLED") and r["msg"] not in found:
            try:
                name, body = codec.decode(r["payload"])
            except (codec.CodecError, ValueError, TypeError):
                return None
            found[name] = body
            if layer is None:
                layer = path
    if len(found) != 3:
        return None
    try:
        return CdsTranscript(B.as_bits(found["PREAMBLE"]), CdsStatement.from_wire(found["STATEMENT"]),
                             B.as_bits(found["GARBLED"]["cstar"]))
    except (KeyError, TypeError, ValueError):
        return None


def cds_ver(tau, x: CdsStatement, mu, pi: CdsProof) -> bool:
    """Public check that the transcript ``tau`` binds ``(x, μ)``; ``tau`` may be records."""
    if not isinstance(tau, CdsTranscript):
        tau = cds_transcript(tau) if tau is not None else None
    if tau is None or pi is None or tau.x != x:
        return False
    mu = B.as_bits(mu)
    if not np.array_equal(B.as_bits(pi.mu), mu):
        return False
    return verify_string(tau.rho, tau.cstar, mu, pi.rstar)
