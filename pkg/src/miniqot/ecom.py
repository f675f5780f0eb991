"""Extractable selective-opening commitment built from verifiable CDS.

Commit phase (layer ``ecom``):

1. C sends ``ρ``; R sends ``ρ*``.
2. R sends a trapdoor ``c = com_ρ(0; r)`` and proves it commits to 0.
3. CDS with C as sender on ``x = (ρ, c, 1)`` and secret ``μ⃗``; R uses
   witness 0, so an honest R learns nothing.
4. C sends ``c*_i = com_{ρ*}(μ_i; r*_i)`` per message and proves that the
   CDS message commitment and ``c*`` hold the same ``μ⃗``.

Open phase: R sends ``I``; C reveals ``μ⃗|_I`` and proves ``c*|_I`` opens to it.

An extractor playing R commits to 1 instead, simulates the step-2 proof and
uses ``r`` as its CDS witness, which yields ``μ⃗`` during the commit phase.
The handles match :mod:`miniqot.socom` so BBCS OT can use them directly.
"""

from __future__ import annotations

import numpy as np

from . import bits as B
from .bbcs import ParallelOt
from .cds import CdsStatement, cds_receive, cds_send
from .naor import commit_many, commit_string
from .socom import _as_messages, _Handle, check_index_set
from .zk.protocol import RewindPlan, zk_prove, zk_sim_prove, zk_verify
from .zk.statements import commits_open_to, ecom_consistency

LAYER = "ecom"


def _cds_ot(ctx) -> ParallelOt:
    return ctx.cds_ot if ctx.cds_ot is not None else ParallelOt()


def trapdoor_statement(lam: int, rho, c, bit: int):
    return commits_open_to(lam, rho, c, [[bit]])


def open_statement(lam: int, rho_star, cstar_rows, msgs):
    return commits_open_to(lam, rho_star, cstar_rows, msgs, kind="ecom-open")


class EcomCommitter(_Handle):
    layer = LAYER

    def commit(self, messages):
        self._advance("fresh", "committed", "commit")
        ctx, sess, lam = self.ctx, self.ctx.sess, self.ctx.lam
        mu = _as_messages(messages)
        K, L = mu.shape
        if K * L == 0:
            raise ValueError("nothing to commit")
        with self._enter() as self.path:
            self.rho = B.random_bits(ctx.rng, 3 * lam)
            sess.send("RHO", self.rho)
            self.rho_star = B.as_bits((yield from sess.recv("RHO_STAR")))
            c = B.as_bits((yield from sess.recv("TRAPDOOR_COMMIT")))
            if self.rho_star.size != 3 * lam or c.size != 3 * lam:
                ctx.abort("ecom: malformed setup message")
            yield from zk_verify(ctx, trapdoor_statement(lam, self.rho, c, 0), rho=self.rho)

            x = CdsStatement(self.rho, c, 1)
            cds_mu = ctx.hook("ecom.cds-secret", mu.reshape(-1), messages=mu)
            out = yield from cds_send(ctx, x, cds_mu, _cds_ot(ctx))

            self.messages = mu
            self.r_star = B.random_bits(ctx.rng, K * lam).reshape(K, lam)
            self.cstar = commit_many(self.rho_star, mu, self.r_star)
            sess.send("CSTAR_COMMITS", ctx.hook("ecom.cstar", self.cstar, messages=mu, rho_star=self.rho_star,
                                                r_star=self.r_star))
            stmt = ecom_consistency(lam, out.rho, out.cstar, self.rho_star, self.cstar, L)
            witness = stmt.assemble({"mu": mu, "r_cds": out.proof.rstar, "r_star": self.r_star})
            yield from self._prove(stmt, witness, self.rho_star)

    def open(self):
        self._advance("committed", "opened", "open")
        ctx, sess, lam = self.ctx, self.ctx.sess, self.ctx.lam
        K, L = self.messages.shape
        with self._resume():
            try:
                I = check_index_set((yield from sess.recv("OPEN_REQUEST")), K)
            except (ValueError, TypeError):
                ctx.abort("ecom: malformed opening request")
            revealed = np.asarray(self._reveal(I), dtype=np.uint8).reshape(I.size, L)
            sess.send("OPEN_REVEAL", revealed)
            if I.size:
                stmt = open_statement(lam, self.rho_star, self.cstar[I], revealed)
                yield from self._prove(stmt, stmt.assemble({"r": self.r_star[I]}), self.rho_star)
        return I

    def _reveal(self, I):
        return self.ctx.hook("ecom.reveal", self.messages[I], I=I)

    def _prove(self, stmt, witness, rho):
        return (yield from zk_prove(self.ctx, stmt, witness, rho=rho))


class EcomReceiver(_Handle):
    layer = LAYER
    trapdoor_bit = 0

    def receive(self):
        self._advance("fresh", "committed", "receive")
        ctx, sess, lam = self.ctx, self.ctx.sess, self.ctx.lam
        with self._enter() as self.path:
            rho = B.as_bits((yield from sess.recv("RHO")))
            if rho.size != 3 * lam:
                ctx.abort("ecom: malformed coin string")
            self.rho_star = B.random_bits(ctx.rng, 3 * lam)
            sess.send("RHO_STAR", self.rho_star)
            r = B.random_bits(ctx.rng, lam)
            c = commit_string(rho, [self.trapdoor_bit], r)
            sess.send("TRAPDOOR_COMMIT", c)
            yield from self._trapdoor_proof(trapdoor_statement(lam, rho, c, 0), r, rho)

            res = yield from cds_receive(ctx, self._cds_witness(r), _cds_ot(ctx))
            if res.x != CdsStatement(rho, c, 1):
                ctx.abort("ecom: CDS statement does not match the trapdoor")
            self.cds_result = res

            cstar = np.asarray((yield from sess.recv("CSTAR_COMMITS")), dtype=np.uint8)
            if (cstar.ndim != 2 or cstar.shape[0] == 0 or cstar.shape[1] % (3 * lam)
                    or cstar.shape[0] * cstar.shape[1] != res.cstar.size):
                ctx.abort("ecom: malformed message commitments")
            self.cstar = cstar
            self.k, self.L = cstar.shape[0], cstar.shape[1] // (3 * lam)
            stmt = ecom_consistency(lam, res.rho, res.cstar, self.rho_star, cstar, self.L)
            yield from zk_verify(ctx, stmt, rho=self.rho_star)
        return self.k, self.L

    def open(self, I):
        I = check_index_set(I, self.k)
        self._advance("committed", "opened", "open")
        ctx, sess, lam = self.ctx, self.ctx.sess, self.ctx.lam
        with self._resume():
            sess.send("OPEN_REQUEST", I)
            msgs = np.asarray((yield from sess.recv("OPEN_REVEAL")), dtype=np.uint8)
            if msgs.shape != (I.size, self.L) or (msgs.size and msgs.max() > 1):
                ctx.abort("ecom: malformed opening")
            if I.size:
                yield from zk_verify(ctx, open_statement(lam, self.rho_star, self.cstar[I], msgs),
                                     rho=self.rho_star)
        return msgs

    def _trapdoor_proof(self, stmt, r, rho):
        yield from zk_prove(self.ctx, stmt, stmt.assemble({"r": r[None, :]}), rho=rho)

    def _cds_witness(self, r):
        return np.zeros(self.ctx.lam, dtype=np.uint8)


class EcomExtractor(EcomReceiver):
    """Receiver that learns the committed messages during the commit phase.

    The trapdoor commits to 1 and its proof is simulated (replay rewinding
    through ``plan`` with the real ZK backend).  After :meth:`receive`,
    ``extracted`` holds the ``(k, L)`` messages, or ``None`` when the CDS
    output was ⊥.
    """

    trapdoor_bit = 1

    def __init__(self, ctx, plan: RewindPlan | None = None):
        super().__init__(ctx)
        self.plan = plan if plan is not None else RewindPlan(0)
        self.extracted: np.ndarray | None = None

    def _trapdoor_proof(self, stmt, r, rho):
        yield from zk_sim_prove(self.ctx, stmt, self.plan, rho=rho)

    def _cds_witness(self, r):
        return r

    def receive(self):
        k, L = yield from super().receive()
        mu = self.cds_result.mu
        self.extracted = None if mu is None or mu.size != k * L else mu.reshape(k, L)
        return k, L


def ecom_extract(ctx, plan: RewindPlan | None = None):
    """Run the commit phase as the extractor; returns ``(handle, messages)``."""
    h = EcomExtractor(ctx, plan)
    yield from h.receive()
    return h, h.extracted
