"""Shared drivers for tests that run two-party sub-protocols."""

import numpy as np

from miniqot import socom
from miniqot.bbcs import ParallelOt
from miniqot.context import Ctx, ZkConfig
from miniqot.harness.adversary import ORACLES
from miniqot.qsim import Broker
from miniqot.transport.runtime import InProcessLink, ProtocolSession, run_parties


def contexts(seed, roles, lam=8, zk=ZkConfig(6, "real"), adversaries=None, cds_ot=None, oracles=None):
    link = InProcessLink(oracles or ORACLES)
    broker = Broker(seed)
    ss = np.random.SeedSequence(seed).spawn(len(roles))
    adversaries = adversaries or {}
    ctxs = {r: Ctx(ProtocolSession(r, roles[1 - i], link), np.random.default_rng(ss[i]), broker,
                   adversaries.get(r), zk, lam, cds_ot if cds_ot is not None else ParallelOt())
            for i, r in enumerate(roles)}
    return link, ctxs


def run_commitment(kind, msgs, I, seed=0, lam=8, zk=ZkConfig(6, "real"), adversaries=None, cds_ot=None):
    """Commit to ``msgs`` with backend ``kind`` and open ``I``; returns the run result."""
    link, ctxs = contexts(seed, ("committer", "receiver"), lam, zk, adversaries, cds_ot)
    Committer, Receiver = socom.backend(kind)
    com, rec = Committer(ctxs["committer"]), Receiver(ctxs["receiver"])

    def committer():
        yield from com.commit(msgs)
        return (yield from com.open())

    def receiver():
        yield from rec.receive()
        return (yield from rec.open(I))

    return run_parties({"committer": committer(), "receiver": receiver()}, link)


ACCEPTANCE_LINES: list[str] = []
