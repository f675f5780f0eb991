"""Simulator programs, one per corrupted-party case, as executable fixtures.

Each fixture runs its simulator against a real (honest or hooked) party
and reports how the simulated execution compares with the ideal
functionality or with a real execution.  Simulators only use the
privileges their security argument grants them: playing the ideal
sub-functionalities (so-com, parallel OT, ZK), delaying their own
measurements, rewinding a verifier by replay, and unbounded search at
small ``λ``.  Tests may additionally peek at the broker to build the
reference answer; simulators never do.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import bits as B
from ..bbcs import FPot, QotParams, _hash_many, pad_bits, qot_receive, qot_send
from ..cds import CdsStatement, cds_receive, cds_send, garble_instances
from ..context import Ctx, ZkConfig
from ..ecom import EcomCommitter, EcomReceiver
from ..naor import commit_many, commit_string
from ..qsim import Broker
from ..socom import FSoCom, IdealSoComCommitter, SoComCommitter, SoComReceiver, check_index_set
from ..transport import codec
from ..transport.runtime import InProcessLink, ProtocolSession, run_parties
from ..zk.protocol import IdealZk, RewindPlan, run_with_rewinding, zk_prove, zk_sim_prove
from ..zk.statements import socom_consistency
from .adversary import AdversaryStrategy
from .extract import OK, brute_force_extract

KINDS = ("qot-sender-sim", "qot-receiver-sim", "socom-sender-sim", "socom-receiver-sim",
         "cds-receiver-sim", "cds-sender-sim", "ecom-extractor", "ecom-receiver-sim")


@dataclass
class SimReport:
    kind: str
    ok: bool
    details: dict = field(default_factory=dict)


@dataclass
class FCds:
    """Ideal CDS: the receiver learns ``μ`` iff its witness satisfies ``x``."""

    x: CdsStatement
    mu: np.ndarray

    def query(self, w) -> np.ndarray | None:
        return self.mu.copy() if self.x.holds(w) else None


def _setup(seed: int, roles: tuple[str, str], lam: int, zk: ZkConfig, oracles: dict,
           adversaries: dict | None = None):
    adversaries = adversaries or {}
    link = InProcessLink({"zk": IdealZk, "socom": FSoCom, "pot": FPot, **oracles})
    broker = Broker(seed)
    ss = np.random.SeedSequence(seed).spawn(3)
    ctxs = {role: Ctx(ProtocolSession(role, roles[1 - i], link), np.random.default_rng(ss[i]), broker,
                      adversaries.get(role), zk, lam)
            for i, role in enumerate(roles)}
    return link, ctxs, broker, np.random.default_rng(ss[2])


def _output(res, party):
    return None if res.aborted else res.outputs.get(party)


# -- BBCS: corrupted sender -----------------------------------------------------

class _LazySoCom(FSoCom):
    """so-com functionality played by the simulator: records are produced when opened."""

    def __init__(self, path, link, provide):
        super().__init__(path, link)
        self.provide = provide

    def handle(self, party, name, body, aux=None):
        if name == "REVEAL" and self.messages is not None and self.opened is None and party == self.receiver:
            I = check_index_set(body["I"], self.messages.shape[0])
            self.messages = self.messages.copy()
            self.messages[I] = self.provide(I)
        super().handle(party, name, body, aux)


@dataclass
class _DelayedReceiver:
    """Receiver-side simulator that measures nothing until it has to."""

    ctx: Ctx
    params: QotParams
    choice: int | None = None
    handles: np.ndarray | None = None
    partition: tuple | None = None

    def open_checks(self, I):
        theta = B.random_bits(self.ctx.rng, I.size)
        x = self.ctx.broker.measure_batch(self.ctx.sess.party, self.handles[I], theta)
        return np.stack([theta, x], axis=1)

    def party(self):
        ctx, sess, n = self.ctx, self.ctx.sess, self.params.n
        with sess.layer("bbcs"):
            self.handles = np.asarray((yield from sess.recv("QUBITS")), dtype=np.int64).reshape(-1)
            if self.handles.size != n:
                ctx.abort("bbcs: wrong number of qubits")
            com = IdealSoComCommitter(ctx)
            yield from com.commit(np.zeros((n, 2), dtype=np.uint8))
            T = np.sort(np.asarray((yield from com.open()), dtype=np.int64))
            rest = np.setdiff1d(np.arange(n), T)
            theta_hat = np.asarray((yield from sess.recv("BASES_REVEAL")), dtype=np.uint8).reshape(-1)
            if theta_hat.size != rest.size:
                ctx.abort("bbcs: malformed basis reveal")
            x_hat = np.zeros(n, dtype=np.uint8)
            x_hat[rest] = ctx.broker.measure_batch(sess.party, self.handles[rest], theta_hat)
            # partition distributed exactly as an honest receiver's
            c = self.choice if self.choice is not None else int(ctx.rng.integers(0, 2))
            same = B.random_bits(ctx.rng, rest.size).astype(bool)
            I0, I1 = (rest[same], rest[~same]) if c == 0 else (rest[~same], rest[same])
            self.partition = (I0, I1)
            sess.send("PARTITION", {"I0": [I0], "I1": [I1]})
            tr = yield from sess.recv("TRANSFER")
            descs = np.asarray(tr["f"], dtype=np.uint8).reshape(1, -1)
            masked = np.asarray(tr["m"], dtype=np.uint8).reshape(2, self.params.ell)
        xs = np.stack([pad_bits(x_hat, I, n) for I in (I0, I1)])
        self.transfer = (descs[0], masked)
        return masked ^ _hash_many(np.repeat(descs, 2, axis=0), xs, self.params.ell)


class QotSenderSim:
    """Extracts both secrets from a possibly malicious BBCS sender.

    The simulator plays the so-com functionality and the receiver; it
    measures opened positions in random bases when asked, and the rest in
    the sender's announced bases, so both halves of the partition decode.
    """

    kind = "qot-sender-sim"

    def run(self, seed: int, params: QotParams = QotParams(8, 3 / 8, 2), s0=None, s1=None,
            sender: AdversaryStrategy | None = None, choice: int | None = None, lam: int = 8) -> SimReport:
        sim_box = {}
        oracles = {"socom": lambda path, link: _LazySoCom(path, link, lambda I: sim_box["sim"].open_checks(I))}
        link, ctxs, broker, rng = _setup(seed, ("sender", "receiver"), lam, ZkConfig(6, "ideal"), oracles,
                                         {"sender": sender})
        s0 = B.random_bits(rng, params.ell) if s0 is None else B.as_bits(s0)
        s1 = B.random_bits(rng, params.ell) if s1 is None else B.as_bits(s1)
        sim = sim_box["sim"] = _DelayedReceiver(ctxs["receiver"], params, choice)
        res = run_parties({"sender": qot_send(ctxs["sender"], s0, s1, params, "ideal"),
                           "receiver": sim.party()}, link)
        extracted = _output(res, "receiver")
        if extracted is None:
            return SimReport(self.kind, False, {"aborts": res.aborts})
        # reference decodings from the sender's actual preparation (test-only view)
        x_a, _ = broker.peek_preparation(sim.handles)
        descs, masked = sim.transfer
        ref = np.stack([masked[b] ^ _hash_many(descs[None], pad_bits(x_a, sim.partition[b], params.n)[None],
                                               params.ell)[0] for b in (0, 1)])
        ok = bool(np.array_equal(extracted, ref))
        return SimReport(self.kind, ok, {"extracted": extracted, "reference": ref,
                                         "secrets": np.stack([s0, s1]), "partition": sim.partition})


# -- BBCS: corrupted receiver ---------------------------------------------------

class _RecordingSoCom(FSoCom):
    def __init__(self, path, link, box):
        super().__init__(path, link)
        self.box = box

    def handle(self, party, name, body, aux=None):
        super().handle(party, name, body, aux)
        if name == "COMMIT" and "records" not in self.box:
            self.box["records"] = self.messages


def hamming_choice(theta_a, theta_b, I0, I1) -> int:
    """The sender simulator's choice rule: fewer basis mismatches wins, ties go to 0."""
    w0 = int(np.count_nonzero(theta_a[I0] != theta_b[I0]))
    w1 = int(np.count_nonzero(theta_a[I1] != theta_b[I1]))
    return 0 if w0 <= w1 else 1


class QotReceiverSim:
    """Plays the EPR-mode sender against a possibly malicious receiver.

    It reads the committed bases from the so-com functionality, extracts the
    choice bit with :func:`hamming_choice`, asks the ideal OT for that secret
    and fills the other slot with random bits.
    """

    kind = "qot-receiver-sim"

    def run(self, seed: int, params: QotParams = QotParams(64, 3 / 8, 8), c: int | None = None,
            receiver: AdversaryStrategy | None = None, lam: int = 8) -> SimReport:
        box: dict = {}
        rng = np.random.default_rng([seed, 11])
        s = B.random_bits(rng, 2 * params.ell).reshape(2, -1)
        c = int(rng.integers(0, 2)) if c is None else c

        def transfer(value, ctx, secrets, hashed, parts, theta_a, **info):
            theta_b = np.asarray(box["records"], dtype=np.uint8)[:, 0]
            I0, I1 = parts[0]
            got = hamming_choice(theta_a[0], theta_b, I0, I1)
            box["extracted"] = got
            fake = B.random_bits(ctx.rng, 2 * params.ell).reshape(1, 2, -1)
            fake[0, got] = s[got]  # the ideal OT answers the extracted choice only
            return fake ^ hashed

        sim = AdversaryStrategy("qot-receiver-sim", "bbcs", "sender", {"bbcs.transfer": transfer})
        oracles = {"socom": lambda path, link: _RecordingSoCom(path, link, box)}
        link, ctxs, _, _ = _setup(seed, ("sender", "receiver"), lam, ZkConfig(6, "ideal"), oracles,
                                  {"sender": sim, "receiver": receiver})
        zeros = np.zeros(params.ell, dtype=np.uint8)
        res = run_parties({"sender": qot_send(ctxs["sender"], zeros, zeros, params, "ideal", epr=True),
                           "receiver": qot_receive(ctxs["receiver"], c, params, "ideal")}, link)
        out = _output(res, "receiver")
        ok = box.get("extracted") == c and out is not None and np.array_equal(out, s[c])
        return SimReport(self.kind, bool(ok), {"c": c, "extracted": box.get("extracted"), "out": out,
                                               "aborts": res.aborts})


# -- so-com ------------------------------------------------------------------------

class _ExtractingReceiver(SoComReceiver):
    def receive(self):
        k, L = yield from super().receive()
        self.extraction = brute_force_extract(self.rho, self.commitments, self.ctx.lam)
        return k, L


class SoComSenderSim:
    """Honest so-com receiver plus brute-force extraction of every committed message."""

    kind = "socom-sender-sim"

    def run(self, seed: int, lam: int = 8, k: int = 6, L: int = 2, committer: AdversaryStrategy | None = None,
            rounds: int = 6) -> SimReport:
        link, ctxs, _, rng = _setup(seed, ("committer", "receiver"), lam, ZkConfig(rounds, "real"), {},
                                    {"committer": committer})
        mu = B.random_bits(rng, k * L).reshape(k, L)
        I = np.flatnonzero(B.random_bits(rng, k))
        com, rec = SoComCommitter(ctxs["committer"]), _ExtractingReceiver(ctxs["receiver"])

        def c_party():
            yield from com.commit(mu)
            return (yield from com.open())

        def r_party():
            yield from rec.receive()
            return (yield from rec.open(I))

        res = run_parties({"committer": c_party(), "receiver": r_party()}, link)
        ext = getattr(rec, "extraction", None)
        opened = _output(res, "receiver")
        unique = ext is not None and ext.unique
        if opened is not None:
            # an accepted opening must agree with what was extracted
            ok = unique and np.array_equal(opened, ext.messages[I])
        else:
            ok = True
        return SimReport(self.kind, bool(ok), {"status": None if ext is None else ext.status,
                                               "extracted": None if ext is None else ext.messages,
                                               "committed": mu, "opened": opened, "I": I,
                                               "aborts": res.aborts})


class _SimSoComCommitter(SoComCommitter):
    """Commits to zeros and equivocates at opening with a simulated proof."""

    def __init__(self, ctx, plan: RewindPlan, ideal):
        super().__init__(ctx)
        self.plan, self.ideal = plan, ideal

    def open(self):
        self._advance("committed", "opened", "open")
        ctx = self.ctx
        k, L = self.messages.shape
        with self._resume():
            try:
                I = check_index_set((yield from ctx.sess.recv("OPEN_REQUEST")), k)
            except (ValueError, TypeError):
                ctx.abort("socom: malformed opening request")
            revealed = np.asarray(self.ideal(I), dtype=np.uint8).reshape(I.size, L)
            ctx.sess.send("OPEN_REVEAL", revealed)
            stmt = socom_consistency(ctx.lam, self.rho, self.commitments, I, revealed)
            yield from zk_sim_prove(ctx, stmt, self.plan, rho=self.rho)
        return I


class SoComReceiverSim:
    """Committer simulator: commits to zeros, opens to whatever the ideal so-com reveals."""

    kind = "socom-receiver-sim"

    def run(self, seed: int, lam: int = 8, k: int = 6, L: int = 2, receiver: AdversaryStrategy | None = None,
            rounds: int = 6) -> SimReport:
        mu = B.random_bits(np.random.default_rng([seed, 5]), k * L).reshape(k, L)

        def once(plan):
            link, ctxs, _, rng = _setup(seed, ("committer", "receiver"), lam, ZkConfig(rounds, "real"), {},
                                        {"receiver": receiver})
            I = np.flatnonzero(B.random_bits(rng, k))
            com = _SimSoComCommitter(ctxs["committer"], plan, lambda J: mu[J])
            rec = SoComReceiver(ctxs["receiver"])

            def c_party():
                yield from com.commit(np.zeros((k, L), dtype=np.uint8))
                return (yield from com.open())

            def r_party():
                yield from rec.receive()
                return (yield from rec.open(I))

            return run_parties({"committer": c_party(), "receiver": r_party()}, link), I

        plan = RewindPlan(seed)
        res, I = run_with_rewinding(once, plan)
        out = _output(res, "receiver")
        ok = out is not None and np.array_equal(out, mu[I])
        return SimReport(self.kind, bool(ok), {"I": I, "out": out, "messages": mu,
                                               "rewinds": sum(plan.tries.values()) - len(plan.tries)})


# -- CDS ---------------------------------------------------------------------------

class _InterceptPot(FPot):
    """Parallel-OT functionality played by the simulating sender.

    The receiver's choices are forwarded to the simulator before it commits
    to the OT inputs.
    """

    def __init__(self, path, link, sim_party: str):
        super().__init__(path, link)
        self.sim_party = sim_party
        self.choices: np.ndarray | None = None
        self.chooser = None

    def handle(self, party, name, body, aux=None):
        if name == "RECEIVER" and party != self.sim_party and self.choices is None:
            self.choices = np.asarray(body["c"], dtype=np.int64).reshape(-1)
            self.chooser = party
            self.deliver(self.sim_party, "CHOICES", {"c": self.choices})
        elif name == "SENDER" and party == self.sim_party and self.choices is not None and not self.answered:
            pairs = np.asarray(body["x"], dtype=np.uint8)
            self.answered = True
            self.deliver(self.chooser, "REVEAL", {"x": pairs[np.arange(self.choices.size), self.choices]})
            self.deliver(party, "DONE")


def cds_receiver_sim_party(ctx, x: CdsStatement, n_mu: int, f_cds: FCds, box: dict):
    """Sender-side simulator: garbles only after it has seen the receiver's choices."""
    sess, lam = ctx.sess, ctx.lam
    with sess.layer("cds"):
        rho = B.as_bits((yield from sess.recv("PREAMBLE")))
        sess.send("STATEMENT", x.to_wire())
        with sess.layer("pot"):
            sigma = np.asarray((yield from sess.recv_oracle("CHOICES"))["c"], dtype=np.uint8)
            sigma = sigma.reshape(2 * lam, lam)
            hits = [i for i in range(2 * lam) if x.holds(sigma[i])]
            box["witness"] = sigma[hits[0]] if hits else None
            mu = f_cds.query(box["witness"]) if hits else None
            box["mu"] = mu
            st = garble_instances(ctx, x, mu if mu is not None else np.zeros(n_mu, np.uint8), rho)
            sess.to_oracle("pot", "SENDER", {"x": st.ot_inputs()})
            yield from sess.recv_oracle("DONE")
        sess.send("GARBLED", st.garbled_frame())
        yield from zk_prove(ctx, st.statement, st.witness(), rho=rho)


class CdsReceiverSim:
    """Finds the receiver's witness among its OT choices and queries the ideal CDS with it."""

    kind = "cds-receiver-sim"

    def run(self, seed: int, lam: int = 8, n_mu: int = 2, witness: str = "valid",
            receiver: AdversaryStrategy | None = None, zk: str = "ideal") -> SimReport:
        oracles = {"pot": lambda path, link: _InterceptPot(path, link, "sender")}
        link, ctxs, _, rng = _setup(seed, ("sender", "receiver"), lam, ZkConfig(6, zk), oracles,
                                    {"receiver": receiver})
        rho = B.random_bits(rng, 3 * lam)
        r = B.random_bits(rng, lam)
        x = CdsStatement(rho, commit_string(rho, [1], r), 1)
        w = r if witness == "valid" else B.random_bits(rng, lam)
        f = FCds(x, B.random_bits(rng, n_mu))
        box: dict = {}
        res = run_parties({"sender": cds_receiver_sim_party(ctxs["sender"], x, n_mu, f, box),
                           "receiver": cds_receive(ctxs["receiver"], w)}, link)
        out = _output(res, "receiver")
        got = None if out is None else out.mu
        expect = f.query(w)
        same = (got is None and expect is None) or (got is not None and expect is not None
                                                     and np.array_equal(got, expect))
        found = box.get("witness") is not None
        # at small λ a random cut-and-choose string can itself be a witness; querying with it is allowed
        ok = out is not None and same and (found or not x.holds(w))
        return SimReport(self.kind, bool(ok), {"found": found, "valid": x.holds(w), "out": got,
                                               "ideal": expect, "aborts": res.aborts})


class _CapturePot(FPot):
    def __init__(self, path, link, box):
        super().__init__(path, link)
        box["pot"] = self


def _garbled_frame(records) -> dict | None:
    for r in records:
        if r.get("msg") == "GARBLED":
            return codec.decode(r["payload"])[1]
    return None


def bad_instances(pairs: np.ndarray, clab: np.ndarray, rho, lam: int) -> np.ndarray:
    """Instances with some (wire, bit) whose transferred label and coin miss the commitment."""
    p = np.asarray(pairs, dtype=np.uint8).reshape(2 * lam, lam, 2, 2 * lam)
    got = commit_many(rho, p[..., :lam].reshape(-1, lam), p[..., lam:].reshape(-1, lam))
    ok = np.all(got.reshape(2 * lam, lam, 2, -1) == np.asarray(clab).reshape(2 * lam, lam, 2, -1), axis=-1)
    return np.flatnonzero(~ok.all(axis=(1, 2)))


class CdsSenderSim:
    """Unbounded simulator for a malicious CDS sender (``λ`` ≤ 12).

    It runs an honest receiver with a dummy witness, intercepts the OT
    inputs, counts bad instances and, unless more than ``λ`` are bad,
    recovers ``μ`` from ``c*`` by exhaustive search.  The fixture compares
    the ideal-world output with a real receiver holding ``w``.
    """

    kind = "cds-sender-sim"

    def _execute(self, seed, lam, n_mu, w, sender, zk, capture):
        box: dict = {}
        oracles = {"pot": lambda path, link: _CapturePot(path, link, box)} if capture else {}
        link, ctxs, _, rng = _setup(seed, ("sender", "receiver"), lam, ZkConfig(6, zk), oracles,
                                    {"sender": sender})
        rho = B.random_bits(rng, 3 * lam)
        r = B.random_bits(rng, lam)
        x = CdsStatement(rho, commit_string(rho, [1], r), 1)
        mu = B.random_bits(rng, n_mu)
        wit = r if w == "valid" else (np.zeros(lam, np.uint8) if w == "dummy" else B.random_bits(rng, lam))
        res = run_parties({"sender": cds_send(ctxs["sender"], x, mu),
                           "receiver": cds_receive(ctxs["receiver"], wit)}, link)
        return res, x, mu, wit, box

    def run(self, seed: int, lam: int = 8, n_mu: int = 2, witness: str = "valid",
            sender: AdversaryStrategy | None = None, zk: str = "ideal") -> SimReport:
        res, x, mu, _, box = self._execute(seed, lam, n_mu, "dummy", sender, zk, capture=True)
        real, _, _, w, _ = self._execute(seed, lam, n_mu, witness, sender, zk, capture=False)
        real_out = None if real.aborted else real.outputs["receiver"].mu
        if res.aborted:
            ideal = "abort"
            bad = None
        else:
            out = res.outputs["receiver"]
            garbled = _garbled_frame(res.records)
            bad = bad_instances(box["pot"].pairs, garbled["clab"], out.rho, lam)
            if bad.size > lam:
                ideal = None
            else:
                ext = brute_force_extract(out.rho, B.as_bits(garbled["cstar"])[None, :], lam)
                ideal = FCds(x, ext.messages[0]).query(w) if ext.status[0] == OK else None
        if isinstance(ideal, str):
            ok = real.aborted
        else:
            ok = (not real.aborted) and ((ideal is None and real_out is None) or (
                ideal is not None and real_out is not None and np.array_equal(ideal, real_out)))
        return SimReport(self.kind, bool(ok), {"ideal": ideal, "real": real_out, "real_aborted": real.aborted,
                                               "bad": None if bad is None else bad.tolist(), "mu": mu})


# -- extractable commitment ----------------------------------------------------------

class EcomExtractorFixture:
    """Extractor as receiver; the extracted vector must match every accepted opening."""

    kind = "ecom-extractor"

    def run(self, seed: int, lam: int = 8, k: int = 4, L: int = 2, committer: AdversaryStrategy | None = None,
            zk: str = "real", rounds: int = 6) -> SimReport:
        from .adversary import CommitProtocol
        proto = CommitProtocol("ecom", lam, k, L, ZkConfig(rounds, zk), extract=True, open_all=True)
        o = proto.trial(seed, committer)
        ext = o.data.get("extracted")
        ok = o.kind == "success" or (o.kind == "abort" and committer is not None)
        return SimReport(self.kind, bool(ok), {"outcome": o.label, "extracted": ext, "opened": o.data.get("opened"),
                                               "committed": o.data.get("mu")})


class _SimEcomCommitter(EcomCommitter):
    """Commits to zeros, simulates its own proofs, reveals what the ideal so-com says."""

    def __init__(self, ctx, plan: RewindPlan, ideal):
        super().__init__(ctx)
        self.plan, self.ideal = plan, ideal

    def _prove(self, stmt, witness, rho):
        yield from zk_sim_prove(self.ctx, stmt, self.plan, rho=rho)

    def _reveal(self, I):
        return self.ideal(I)


class EcomReceiverSim:
    kind = "ecom-receiver-sim"

    def run(self, seed: int, lam: int = 8, k: int = 4, L: int = 2, receiver: AdversaryStrategy | None = None,
            zk: str = "real", rounds: int = 6) -> SimReport:
        mu = B.random_bits(np.random.default_rng([seed, 5]), k * L).reshape(k, L)

        def once(plan):
            link, ctxs, _, rng = _setup(seed, ("committer", "receiver"), lam, ZkConfig(rounds, zk), {},
                                        {"receiver": receiver})
            I = np.flatnonzero(B.random_bits(rng, k))
            com = _SimEcomCommitter(ctxs["committer"], plan, lambda J: mu[J])
            rec = EcomReceiver(ctxs["receiver"])

            def c_party():
                yield from com.commit(np.zeros((k, L), dtype=np.uint8))
                return (yield from com.open())

            def r_party():
                yield from rec.receive()
                return (yield from rec.open(I))

            return run_parties({"committer": c_party(), "receiver": r_party()}, link), I

        plan = RewindPlan(seed)
        res, I = run_with_rewinding(once, plan)
        out = _output(res, "receiver")
        ok = out is not None and np.array_equal(out, mu[I])
        return SimReport(self.kind, bool(ok), {"I": I, "out": out, "messages": mu, "aborts": res.aborts,
                                               "rewinds": sum(plan.tries.values()) - len(plan.tries)})


_FIXTURES = {
    "qot-sender-sim": QotSenderSim,
    "qot-receiver-sim": QotReceiverSim,
    "socom-sender-sim": SoComSenderSim,
    "socom-receiver-sim": SoComReceiverSim,
    "cds-receiver-sim": CdsReceiverSim,
    "cds-sender-sim": CdsSenderSim,
    "ecom-extractor": EcomExtractorFixture,
    "ecom-receiver-sim": EcomReceiverSim,
}


def simulator_fixture(kind: str):
    """Return the simulator program for ``kind`` (one of :data:`KINDS`)."""
    try:
        return _FIXTURES[kind]()
    except KeyError:
        raise ValueError(f"unknown simulator kind {kind!r}; choose from {KINDS}") from None
