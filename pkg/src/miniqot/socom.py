"""Selective-opening commitments: the Naor/ZK protocol and the ideal functionality.

Both come as committer/receiver handle pairs with the same generator
interface, so protocols built on top (BBCS OT) can swap backends:

* ``committer.commit(messages)`` then ``I = committer.open()``
* ``(k, L) = receiver.receive()`` then ``msgs = receiver.open(I)``

Messages are ``(k, L)`` bit arrays.  The commit and open phases run in the
same layer so the transcript shows one sub-protocol per commitment.
"""

from __future__ import annotations

import numpy as np

from . import bits as B
from .naor import commit_many
from .transport.runtime import Oracle
from .zk.protocol import zk_prove, zk_verify
from .zk.statements import socom_consistency

LAYER = "socom"


class SoComUsageError(RuntimeError):
    """Commit twice, open twice, or open before commit."""


def _as_messages(messages) -> np.ndarray:
    m = np.asarray(messages, dtype=np.uint8)
    if m.ndim != 2:
        raise ValueError("messages must be a (k, L) bit array")
    if m.size and m.max() > 1:
        raise ValueError("messages must be bits")
    return m


def check_index_set(I, k: int) -> np.ndarray:
    I = np.asarray(I, dtype=np.int64).reshape(-1)
    if I.size and (I.min() < 0 or I.max() >= k):
        raise ValueError(f"index set out of range for {k} messages")
    if np.unique(I).size != I.size:
        raise ValueError("index set has repeated entries")
    return np.sort(I)


class _Handle:
    layer = LAYER

    def __init__(self, ctx):
        self.ctx = ctx
        self.path: str | None = None
        self.phase = "fresh"

    def _enter(self):
        return self.ctx.sess.layer(self.layer)

    def _resume(self):
        return self.ctx.sess.resume(self.path)

    def _advance(self, expect: str, to: str, what: str):
        if self.phase != expect:
            raise SoComUsageError(f"{what} not allowed in phase {self.phase!r}")
        self.phase = to


# -- plain protocol -----------------------------------------------------------

class SoComCommitter(_Handle):
    """Committer side of the Naor-commitment protocol with a ZK-proved opening."""

    def commit(self, messages):
        self._advance("fresh", "committed", "commit")
        ctx = self.ctx
        m = _as_messages(messages)
        with self._enter() as self.path:
            rho = B.as_bits((yield from ctx.sess.recv("RHO")))
            if rho.size != 3 * ctx.lam:
                ctx.abort("socom: malformed coin string")
            self.rho, self.messages = rho, m
            self.seeds = B.random_bits(ctx.rng, m.shape[0] * ctx.lam).reshape(m.shape[0], ctx.lam)
            cs = commit_many(rho, m, self.seeds)
            cs = ctx.hook("socom.commits", cs, messages=m, seeds=self.seeds, rho=rho)
            self.commitments = cs
            ctx.sess.send("COMMITS", cs)

    def open(self):
        self._advance("committed", "opened", "open")
        ctx = self.ctx
        k, L = self.messages.shape
        with self._resume():
            I = yield from ctx.sess.recv("OPEN_REQUEST")
            try:
                I = check_index_set(I, k)
            except (ValueError, TypeError):
                ctx.abort("socom: malformed opening request")
            revealed = ctx.hook("socom.reveal", self.messages[I], I=I)
            ctx.sess.send("OPEN_REVEAL", np.asarray(revealed, dtype=np.uint8).reshape(I.size, L))
            stmt = socom_consistency(ctx.lam, self.rho, self.commitments, I, revealed)
            hidden = np.setdiff1d(np.arange(k), I)
            witness = stmt.assemble({"r": self.seeds, "hidden": self.messages[hidden]})
            yield from zk_prove(ctx, stmt, witness, rho=self.rho)
        return I


class SoComReceiver(_Handle):
    def receive(self):
        self._advance("fresh", "committed", "receive")
        ctx = self.ctx
        with self._enter() as self.path:
            self.rho = B.random_bits(ctx.rng, 3 * ctx.lam)
            ctx.sess.send("RHO", self.rho)
            cs = np.asarray((yield from ctx.sess.recv("COMMITS")), dtype=np.uint8)
            if cs.ndim != 2 or cs.shape[1] == 0 or cs.shape[1] % (3 * ctx.lam):
                ctx.abort("socom: malformed commitments")
            self.commitments = cs
        self.k, self.L = cs.shape[0], cs.shape[1] // (3 * ctx.lam)
        return self.k, self.L

    def open(self, I):
        I = check_index_set(I, self.k)
        self._advance("committed", "opened", "open")
        ctx = self.ctx
        with self._resume():
            ctx.sess.send("OPEN_REQUEST", I)
            msgs = np.asarray((yield from ctx.sess.recv("OPEN_REVEAL")), dtype=np.uint8)
            if msgs.shape != (I.size, self.L) or (msgs.size and msgs.max() > 1):
                ctx.abort("socom: malformed opening")
            stmt = socom_consistency(ctx.lam, self.rho, self.commitments, I, msgs)
            yield from zk_verify(ctx, stmt, rho=self.rho)
        return msgs


# -- ideal functionality ------------------------------------------------------

class FSoCom(Oracle):
    """Records one message vector, reveals one chosen subset."""

    def __init__(self, path, link):
        super().__init__(path, link)
        self.messages: np.ndarray | None = None
        self.committer = self.receiver = None
        self.opened: np.ndarray | None = None

    def handle(self, party, name, body, aux=None):
        if name == "COMMIT":
            if self.messages is not None:
                return
            self.messages = _as_messages(body["messages"])
            self.committer, self.receiver = party, body["receiver"]
            k, L = self.messages.shape
            self.deliver(self.receiver, "RECEIPT", {"k": k, "L": L})
        elif name == "REVEAL":
            if self.messages is None or self.opened is not None or party != self.receiver:
                return
            I = check_index_set(body["I"], self.messages.shape[0])
            self.opened = I
            self.deliver(self.receiver, "OPEN", {"I": I, "messages": self.messages[I]})
            self.deliver(self.committer, "CHOICE", {"I": I})


class IdealSoComCommitter(_Handle):
    def commit(self, messages):
        self._advance("fresh", "committed", "commit")
        ctx = self.ctx
        m = _as_messages(messages)
        self.messages = m
        with self._enter() as self.path:
            ctx.sess.to_oracle("socom", "COMMIT", {"messages": m, "receiver": ctx.sess.peer})
        return
        yield  # pragma: no cover

    def open(self):
        self._advance("committed", "opened", "open")
        with self._resume():
            body = yield from self.ctx.sess.recv_oracle("CHOICE")
        return np.asarray(body["I"], dtype=np.int64)


class IdealSoComReceiver(_Handle):
    def receive(self):
        self._advance("fresh", "committed", "receive")
        with self._enter() as self.path:
            body = yield from self.ctx.sess.recv_oracle("RECEIPT")
        self.k, self.L = int(body["k"]), int(body["L"])
        return self.k, self.L

    def open(self, I):
        I = check_index_set(I, self.k)
        self._advance("committed", "opened", "open")
        with self._resume():
            self.ctx.sess.to_oracle("socom", "REVEAL", {"I": I})
            body = yield from self.ctx.sess.recv_oracle("OPEN")
        return np.asarray(body["messages"], dtype=np.uint8).reshape(I.size, self.L)


def backend(kind: str):
    """``(committer_cls, receiver_cls)`` for ``kind`` in {"ideal", "plain", "ecom"}."""
    if kind == "ideal":
        return IdealSoComCommitter, IdealSoComReceiver
    if kind == "plain":
        return SoComCommitter, SoComReceiver
    if kind == "ecom":
        from .ecom import EcomCommitter, EcomReceiver
        return EcomCommitter, EcomReceiver
    raise ValueError(f"unknown so-com backend {kind!r}")
