import numpy as np
import pytest

from helpers import contexts
from miniqot import bits as B
from miniqot.bbcs import ParallelOt, QotParams
from miniqot.cds import (CdsStatement, cds_receive, cds_send, cds_transcript, cds_ver, relation_circuit)
from miniqot.circuit import eval_circuit
from miniqot.context import ZkConfig
from miniqot.harness.adversary import AdversaryStrategy, CdsProtocol, honest, run_adversarial
from miniqot.harness.simulators import simulator_fixture
from miniqot.harness.strategies import cds_bad_instances, cds_single_bad_label
from miniqot.naor import commit_string
from miniqot.transport import codec
from miniqot.transport.runtime import run_parties


def _statement(rng, lam, b=1):
    rho = B.random_bits(rng, 3 * lam)
    r = B.random_bits(rng, lam)
    return CdsStatement(rho, commit_string(rho, [b], r), b), r


def _run(x, mu, w, seed=0, lam=8, zk=ZkConfig(6, "real"), ot=ParallelOt(), sender=None):
    link, ctxs = contexts(seed, ("sender", "receiver"), lam, zk, {"sender": sender})
    return run_parties({"sender": cds_send(ctxs["sender"], x, mu, ot),
                        "receiver": cds_receive(ctxs["receiver"], w, ot)}, link)


def test_relation_circuit(rng):
    lam = 8
    x, r = _statement(rng, lam)
    c = relation_circuit(x, 3)
    mu = np.array([1, 0, 1], np.uint8)
    assert eval_circuit(c, np.concatenate([r, mu])).tolist() == [1, 1, 0, 1]
    assert eval_circuit(c, np.concatenate([r ^ 1, mu])).tolist() == [0, 0, 0, 0]


def test_statement_validation(rng):
    with pytest.raises(ValueError):
        CdsStatement(B.zeros(24), B.zeros(24), 2)
    with pytest.raises(ValueError):
        CdsStatement(B.zeros(24), B.zeros(21), 1)
    x, _ = _statement(rng, 8)
    assert CdsStatement.from_wire(codec.decode(codec.encode(x.to_wire()))) == x


@pytest.mark.parametrize("ot", [ParallelOt(), ParallelOt("bbcs", QotParams(48, 3 / 8, 16), "plain")],
                         ids=["ideal-ot", "bbcs-ot"])
def test_honest_valid_witness(ot, rng):
    lam = 8
    x, r = _statement(rng, lam)
    mu = B.random_bits(rng, 3)
    res = _run(x, mu, r, ot=ot)
    assert not res.aborted
    out = res.outputs["receiver"]
    assert out.x == x and np.array_equal(out.mu, mu)
    pi = res.outputs["sender"].proof
    assert cds_ver(res.records, x, mu, pi)
    assert not cds_ver(res.records, x, mu ^ np.eye(1, 3, 0, dtype=np.uint8)[0], pi)


def test_honest_invalid_witness(rng):
    lam = 8
    x, r = _statement(rng, lam)
    res = _run(x, B.random_bits(rng, 2), r ^ 1)
    assert not res.aborted
    assert res.outputs["receiver"].mu is None


def test_ver_missing_fields(rng):
    lam = 8
    x, r = _statement(rng, lam)
    mu = B.random_bits(rng, 2)
    res = _run(x, mu, r, zk=ZkConfig(6, "ideal"))
    pi = res.outputs["sender"].proof
    tau = cds_transcript(res.records)
    assert tau is not None and cds_ver(tau, x, mu, pi)
    partial = [rec for rec in res.records if rec["msg"] != "GARBLED"]
    assert cds_transcript(partial) is None
    assert not cds_ver(partial, x, mu, pi)
    assert not cds_ver(None, x, mu, pi)
    other, _ = _statement(rng, lam)
    assert not cds_ver(tau, other, mu, pi)


def test_ot_slot_count(rng):
    lam = 8
    x, r = _statement(rng, lam)
    res = _run(x, B.random_bits(rng, 2), r, zk=ZkConfig(6, "ideal"))
    sends = [codec.decode(rec["payload"])[1] for rec in res.records if rec["msg"] == "SENDER"]
    assert len(sends) == 1
    assert np.asarray(sends[0]["x"]).shape == (2 * lam * lam, 2, 2 * lam)


def test_honest_control_many():
    for witness in ("valid", "random"):
        h = run_adversarial(CdsProtocol(lam=8, n_mu=2, witness=witness), honest("cds", "sender"), 100, seed=1)
        assert h["success"] == 100


def test_bad_instances_caught_lambda8():
    """λ+1 spoiled instances: the receiver almost always hits one in its cut."""
    lam, N = 8, 400
    h = run_adversarial(CdsProtocol(lam=lam), cds_bad_instances(lam + 1), N, seed=2)
    assert h["mismatch"] == 0
    # one spoiled slot escapes a cut instance with probability 1/2 per instance: (3/4)^(λ+1)
    p = 0.75 ** (lam + 1)
    assert h.rate(lambda o: o.kind != "abort") <= p + 3 * np.sqrt(p * (1 - p) / N)


def test_many_bad_slots_always_caught():
    lam, N = 8, 200
    h = run_adversarial(CdsProtocol(lam=lam), cds_bad_instances(lam + 1, per_instance=lam), N, seed=3)
    # each spoiled instance escapes only when it is not cut (or every spoiled bit is unselected)
    p = (0.5 + 0.5 * 0.5 ** lam) ** (lam + 1)
    assert h.rate(lambda o: o.kind != "abort") <= p + 3 * np.sqrt(p * (1 - p) / N) + 1 / N


def test_single_bad_label_abort_rate():
    """A spoiled label for w_0 = 1 in instance 0 causes err1 only when the cut picks it."""
    N = 600
    h = run_adversarial(CdsProtocol(lam=8, witness="random"), cds_single_bad_label(0, 0, 1), N, seed=4)
    assert h["mismatch"] == 0
    assert abs(h.abort_rate - 0.25) <= 3 * np.sqrt(0.25 * 0.75 / N)


def test_binding_game(rng):
    """Whenever Ver accepts the sender's (μ, π), an honest receiver never outputs a different secret."""
    lam = 8
    wins = 0
    strategies = [cds_bad_instances(lam + 1), cds_single_bad_label(), None]
    for seed in range(150):
        x, r = _statement(rng, lam)
        mu = B.random_bits(rng, 2)
        res = _run(x, mu, r, seed=seed, zk=ZkConfig(6, "ideal"), sender=strategies[seed % 3])
        sender_out, recv_out = res.outputs.get("sender"), res.outputs.get("receiver")
        if res.aborted or recv_out.mu is None:
            continue
        if cds_ver(res.records, x, sender_out.proof.mu, sender_out.proof) and \
                not np.array_equal(recv_out.mu, sender_out.proof.mu):
            wins += 1
    assert wins == 0


def test_err2_when_everything_is_cut(rng):
    lam = 8
    x, r = _statement(rng, lam)
    cut_all = AdversaryStrategy("cut-all", "cds", "receiver", {"cds.cut": lambda v, ctx, **i: np.ones_like(v)})
    link, ctxs = contexts(0, ("sender", "receiver"), lam, ZkConfig(6, "ideal"), {"receiver": cut_all})
    res = run_parties({"sender": cds_send(ctxs["sender"], x, B.zeros(2)),
                       "receiver": cds_receive(ctxs["receiver"], r)}, link)
    assert res.aborted and "err2" in res.aborts[0].reason


@pytest.mark.parametrize("witness", ["valid", "random"])
def test_receiver_simulator(witness):
    sim = simulator_fixture("cds-receiver-sim")
    assert all(sim.run(seed, witness=witness).ok for seed in range(20))


@pytest.mark.parametrize("sender", [None, cds_single_bad_label()])
def test_sender_simulator(sender):
    sim = simulator_fixture("cds-sender-sim")
    assert all(sim.run(seed, sender=sender).ok for seed in range(20))
