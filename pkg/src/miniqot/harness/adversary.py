"""Adversary strategies and seeded trial runners.

A strategy corrupts one role of a protocol and overrides named steps
through :meth:`miniqot.context.Ctx.hook`; every other step runs the honest
code.  A trial protocol knows how to set up one execution of a layer with
random honest inputs, which ideal functionality defines the right answer,
and how to classify the result:

* ``success``: no abort and the honest output matches the ideal one,
* ``abort(reason)``: some party aborted (first local abort reason),
* ``mismatch``: no abort but the honest output is wrong,
* ``strategy-crash``: a hook raised.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .. import bits as B
from ..bbcs import FPot, ParallelOt, QotParams, qot_receive, qot_send
from ..context import Ctx, ZkConfig
from ..qsim import Broker
from ..socom import FSoCom
from ..transport.runtime import InProcessLink, ProtocolSession, RunResult, StrategyCrash, run_parties
from ..zk.protocol import IdealZk, RewindPlan, run_with_rewinding, zk_prove, zk_verify

CORRUPTIONS = ("sender", "receiver", "committer", "prover", "verifier")
ORACLES = {"zk": IdealZk, "socom": FSoCom, "pot": FPot}


@dataclass
class AdversaryStrategy:
    """Static corruption of ``corruption`` in ``layer`` with step overrides ``hooks``.

    A hook is called as ``fn(value, ctx=ctx, **info)`` and returns the value
    the corrupted party uses instead of ``value``.
    """

    name: str
    layer: str
    corruption: str
    hooks: dict[str, Callable] = field(default_factory=dict)

    def __post_init__(self):
        if self.corruption not in CORRUPTIONS:
            raise ValueError(f"corruption must be one of {CORRUPTIONS}")


def honest(layer: str, corruption: str = "receiver") -> AdversaryStrategy:
    return AdversaryStrategy("honest", layer, corruption)


@dataclass
class Outcome:
    kind: str
    reason: str = ""
    data: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        return f"abort({self.reason})" if self.kind == "abort" else self.kind


class Histogram(Counter):
    """Outcome labels with counts; ``outcomes`` keeps the per-trial records in order."""

    def __init__(self, outcomes: list[Outcome]):
        super().__init__(o.label for o in outcomes)
        self.outcomes = outcomes

    @property
    def trials(self) -> int:
        return len(self.outcomes)

    def rate(self, pred: Callable[[Outcome], bool]) -> float:
        return sum(1 for o in self.outcomes if pred(o)) / max(len(self.outcomes), 1)

    @property
    def abort_rate(self) -> float:
        return self.rate(lambda o: o.kind == "abort")


def trial_seeds(seed: int, N: int) -> list[int]:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(N)]


def run_adversarial(protocol, strategy: AdversaryStrategy, N: int, seed: int = 0) -> Histogram:
    """Run ``N`` seeded trials of ``protocol`` against ``strategy``."""
    if strategy.layer != protocol.layer:
        raise ValueError(f"strategy targets {strategy.layer!r}, protocol is {protocol.layer!r}")
    if strategy.corruption not in protocol.roles:
        raise ValueError(f"{protocol.layer} has no role {strategy.corruption!r}")
    out = []
    for s in trial_seeds(seed, N):
        try:
            out.append(protocol.trial(s, strategy))
        except StrategyCrash as exc:
            out.append(Outcome("strategy-crash", str(exc)))
    return Histogram(out)


# -- trial plumbing ------------------------------------------------------------

def _first_abort(res: RunResult) -> str:
    local = [a for a in res.aborts if not a.propagated]
    return (local or res.aborts)[0].reason


def _setup(seed: int, roles: tuple[str, str], strategy: AdversaryStrategy | None, lam: int,
           zk: ZkConfig, cds_ot=None, oracles=None):
    link = InProcessLink(oracles or ORACLES)
    broker = Broker(seed)
    ss = np.random.SeedSequence(seed).spawn(3)
    ctxs = {}
    for i, role in enumerate(roles):
        adv = strategy if strategy is not None and strategy.corruption == role else None
        ctxs[role] = Ctx(ProtocolSession(role, roles[1 - i], link), np.random.default_rng(ss[i]), broker,
                         adv, zk, lam, cds_ot)
    return link, ctxs, np.random.default_rng(ss[2])


def _classify(res: RunResult, good: bool, data: dict) -> Outcome:
    if res.aborted:
        return Outcome("abort", _first_abort(res), data)
    return Outcome("success" if good else "mismatch", "", data)


@dataclass
class BbcsProtocol:
    """One BBCS OT with random secrets and choice; right answer ``s_c``."""

    params: QotParams
    socom: str = "ideal"
    epr: bool = False
    lam: int = 8
    zk: ZkConfig = field(default_factory=lambda: ZkConfig(6, "ideal"))
    layer: str = "bbcs"
    roles: tuple = ("sender", "receiver")

    def trial(self, seed: int, strategy: AdversaryStrategy | None = None) -> Outcome:
        link, ctxs, rng = _setup(seed, self.roles, strategy, self.lam, self.zk)
        s = B.random_bits(rng, 2 * self.params.ell).reshape(2, -1)
        c = int(rng.integers(0, 2))
        res = run_parties({"sender": qot_send(ctxs["sender"], s[0], s[1], self.params, self.socom, self.epr),
                           "receiver": qot_receive(ctxs["receiver"], c, self.params, self.socom)}, link)
        out = res.outputs.get("receiver")
        good = isinstance(out, np.ndarray) and np.array_equal(out, s[c])
        return _classify(res, good, {"c": c, "s": s, "out": out})


@dataclass
class CdsProtocol:
    """One CDS run on ``x = (ρ, com_ρ(1; r), 1)``; right answer ``μ`` iff ``R(x, w)``.

    ``witness`` is ``"valid"`` (``w = r``) or ``"random"``.
    """

    lam: int = 8
    n_mu: int = 1
    witness: str = "valid"
    ot: ParallelOt = field(default_factory=ParallelOt)
    zk: ZkConfig = field(default_factory=lambda: ZkConfig(6, "ideal"))
    layer: str = "cds"
    roles: tuple = ("sender", "receiver")

    def trial(self, seed: int, strategy: AdversaryStrategy | None = None) -> Outcome:
        from ..cds import CdsStatement, cds_receive, cds_send
        from ..naor import commit_string
        link, ctxs, rng = _setup(seed, self.roles, strategy, self.lam, self.zk)
        lam = self.lam
        rho = B.random_bits(rng, 3 * lam)
        r = B.random_bits(rng, lam)
        x = CdsStatement(rho, commit_string(rho, [1], r), 1)
        w = r if self.witness == "valid" else B.random_bits(rng, lam)
        mu = B.random_bits(rng, self.n_mu)
        res = run_parties({"sender": cds_send(ctxs["sender"], x, mu, self.ot),
                           "receiver": cds_receive(ctxs["receiver"], w, self.ot)}, link)
        expect = mu if x.holds(w) else None
        out = res.outputs.get("receiver")
        got = getattr(out, "mu", None)
        good = (got is None) if expect is None else (got is not None and np.array_equal(got, expect))
        return _classify(res, good, {"w": w, "mu": mu, "valid": x.holds(w), "out": got,
                                     "records": res.records})


@dataclass
class CommitProtocol:
    """Commit to random ``(k, L)`` messages, then open a random subset.

    ``backend`` is ``"plain"`` or ``"ecom"``.  With ``extract=True`` the
    receiver is the ecom extractor and the right answer at opening is the
    extracted vector (an accepted opening that differs is a ``mismatch``).
    """

    backend: str = "ecom"
    lam: int = 8
    k: int = 4
    L: int = 2
    zk: ZkConfig = field(default_factory=lambda: ZkConfig(6, "ideal"))
    cds_ot: ParallelOt = field(default_factory=ParallelOt)
    extract: bool = False
    open_all: bool = False
    layer: str = "ecom"
    roles: tuple = ("committer", "receiver")

    def __post_init__(self):
        if self.backend == "plain":
            self.layer = "socom"
        if self.extract and self.backend != "ecom":
            raise ValueError("extraction needs the ecom backend")

    def _run(self, seed, strategy, plan):
        from .. import socom
        from ..ecom import EcomExtractor
        link, ctxs, rng = _setup(seed, self.roles, strategy, self.lam, self.zk, self.cds_ot)
        mu = B.random_bits(rng, self.k * self.L).reshape(self.k, self.L)
        I = np.arange(self.k) if self.open_all else np.flatnonzero(B.random_bits(rng, self.k))
        Committer, Receiver = socom.backend(self.backend)
        com = Committer(ctxs["committer"])
        rec = EcomExtractor(ctxs["receiver"], plan) if self.extract else Receiver(ctxs["receiver"])

        def committer():
            yield from com.commit(mu)
            return (yield from com.open())

        def receiver():
            yield from rec.receive()
            return (yield from rec.open(I))

        res = run_parties({"committer": committer(), "receiver": receiver()}, link)
        return res, mu, I, getattr(rec, "extracted", None)

    def trial(self, seed: int, strategy: AdversaryStrategy | None = None) -> Outcome:
        if self.extract and self.zk.backend == "real":
            res, mu, I, ext = run_with_rewinding(lambda p: self._run(seed, strategy, p), RewindPlan(seed))
        else:
            res, mu, I, ext = self._run(seed, strategy, RewindPlan(seed))
        opened = res.outputs.get("receiver")
        data = {"mu": mu, "I": I, "opened": opened, "extracted": ext}
        if not isinstance(opened, np.ndarray):
            return _classify(res, False, data)
        ref = ext if self.extract else mu
        good = ref is not None and np.array_equal(opened, ref[I])
        return _classify(res, good, data)


@dataclass
class ZkProtocol:
    """One proof of ``statement`` with ``witness``; success iff the verdict matches the truth."""

    statement: Any
    witness: np.ndarray
    rounds: int = 10
    lam: int = 8
    layer: str = "zk"
    roles: tuple = ("prover", "verifier")

    def trial(self, seed: int, strategy: AdversaryStrategy | None = None) -> Outcome:
        zk = ZkConfig(self.rounds, "real")
        link, ctxs, _ = _setup(seed, self.roles, strategy, self.lam, zk)
        res = run_parties({"prover": zk_prove(ctxs["prover"], self.statement, self.witness),
                           "verifier": zk_verify(ctxs["verifier"], self.statement)}, link)
        truth = self.statement.evaluate(self.witness) == 1
        accepted = not res.aborted and res.outputs.get("verifier") is True
        if res.aborted:
            return Outcome("abort", _first_abort(res), {"accepted": False, "truth": truth})
        return Outcome("success" if truth else "mismatch", "", {"accepted": accepted, "truth": truth})


@dataclass
class StackProtocol:
    """The full tower with random secrets and choice."""

    config: Any
    layer: str = "stack"
    roles: tuple = ("sender", "receiver")

    def trial(self, seed: int, strategy: AdversaryStrategy | None = None) -> Outcome:
        from ..stack import plain_ot
        cfg = self.config.with_(seed=seed)
        rng = np.random.default_rng([seed, 7])
        s = B.random_bits(rng, 2 * cfg.outer.ell).reshape(2, -1)
        c = int(rng.integers(0, 2))
        adv = {strategy.corruption: strategy} if strategy is not None else None
        out = plain_ot(s[0], s[1], c, cfg, adv)
        if out.aborted:
            return Outcome("abort", out.aborts[0].reason, {"c": c})
        good = np.array_equal(out.value, s[c])
        return Outcome("success" if good else "mismatch", "", {"c": c, "out": out.value, "s": s})
