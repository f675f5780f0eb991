import numpy as np
import pytest

from helpers import contexts
from miniqot import bits as B
from miniqot.bbcs import (FPot, ParallelOt, QotParams, check_partition, pad_bits, pot_receive, pot_send,
                          qot_receive, qot_send)
from miniqot.context import ZkConfig
from miniqot.harness.adversary import AdversaryStrategy, BbcsProtocol, honest, run_adversarial
from miniqot.harness.stats import chi2_independence
from miniqot.harness.strategies import guess_committing_receiver
from miniqot.transport.runtime import InProcessLink, run_parties


def _ot(params, s0, s1, c, seed=0, backend="ideal", adversaries=None, zk=ZkConfig(4, "real")):
    link, ctxs = contexts(seed, ("sender", "receiver"), zk=zk, adversaries=adversaries)
    return run_parties({"sender": qot_send(ctxs["sender"], s0, s1, params, backend),
                        "receiver": qot_receive(ctxs["receiver"], c, params, backend)}, link)


def test_params_validation():
    assert QotParams(8, 3 / 8, 2).t_check == 3
    assert QotParams(4, 3 / 8, 2).t_check == 2  # 1.5 rounds half up
    for bad in (dict(n=8, alpha=0.25, ell=2), dict(n=8, alpha=0.5, ell=2), dict(n=3, alpha=0.3, ell=2)):
        with pytest.raises(ValueError):
            QotParams(**bad)


def test_pad_bits_order_and_zeros():
    x = np.array([1, 0, 1, 1, 0, 1], np.uint8)
    assert pad_bits(x, [5, 0, 2], 6).tolist() == [1, 1, 1, 0, 0, 0]


def test_check_partition():
    rest = np.array([0, 2, 3, 5])
    I0, I1 = check_partition([3, 0], [5, 2], rest, 6)
    assert I0.tolist() == [0, 3] and I1.tolist() == [2, 5]
    with pytest.raises(ValueError):
        check_partition([0, 2], [2, 3, 5], rest, 6)
    with pytest.raises(ValueError):
        check_partition([0, 2], [3], rest, 6)


def test_honest_exhaustive_small():
    """Every seeded honest run at n=8, ℓ=2 outputs s_c and never aborts."""
    params = QotParams(8, 3 / 8, 2)
    h = run_adversarial(BbcsProtocol(params), honest("bbcs", "receiver"), 1000, seed=0)
    assert h["success"] == 1000


@pytest.mark.parametrize("socom", ["plain", "ecom"])
def test_honest_with_real_commitments(socom):
    params = QotParams(16, 3 / 8, 4)
    h = run_adversarial(BbcsProtocol(params, socom=socom, zk=ZkConfig(4, "real")), honest("bbcs"), 5, seed=1)
    assert h["success"] == 5


def test_honest_large_n():
    h = run_adversarial(BbcsProtocol(QotParams(256, 3 / 8, 64)), honest("bbcs"), 100, seed=2)
    assert h["success"] == 100


def test_ell_larger_than_own_set():
    """With ℓ = n/2 the chosen set is usually shorter than ℓ; padding still decodes."""
    params = QotParams(8, 3 / 8, 4)
    h = run_adversarial(BbcsProtocol(params), honest("bbcs"), 300, seed=3)
    assert h["success"] == 300


def test_equal_secrets():
    s = np.array([1, 0, 1, 1], np.uint8)
    res = _ot(QotParams(16, 3 / 8, 4), s, s, 1)
    assert np.array_equal(res.outputs["receiver"], s)


def test_overlapping_partition_aborts():
    def overlap(value, ctx, **info):
        I0, I1 = value
        both = np.union1d(I0[0], I1[0])
        return [both], [both[:1]]

    adv = AdversaryStrategy("overlap", "bbcs", "receiver", {"bbcs.partition": overlap})
    res = _ot(QotParams(16, 3 / 8, 4), B.zeros(4), B.zeros(4), 0, adversaries={"receiver": adv})
    assert res.aborted and "partition" in res.aborts[0].reason


def test_guess_committing_detection_rate():
    params = QotParams(24, 1 / 3, 8)
    assert params.t_check == 8
    N = 1000
    h = run_adversarial(BbcsProtocol(params), guess_committing_receiver(), N, seed=4)
    p = 1 - 0.75 ** 8
    assert abs(h.abort_rate - p) <= 3 * np.sqrt(p * (1 - p) / N)


def test_partition_independent_of_choice():
    """|I_0| has the same distribution for c = 0 and c = 1."""
    params = QotParams(32, 3 / 8, 4)
    sizes = {0: [], 1: []}

    def record(c):
        def partition(value, ctx, **info):
            sizes[c].append(len(value[0][0]))
            return value
        return AdversaryStrategy("record", "bbcs", "receiver", {"bbcs.partition": partition})

    for seed in range(2500):
        for c in (0, 1):
            link, ctxs = contexts(seed, ("sender", "receiver"), adversaries={"receiver": record(c)})
            run_parties({"sender": qot_send(ctxs["sender"], B.zeros(4), B.zeros(4), params),
                         "receiver": qot_receive(ctxs["receiver"], c, params)}, link)
    bins = np.arange(params.n - params.t_check + 2)
    table = np.stack([np.histogram(sizes[c], bins)[0] for c in (0, 1)])
    assert chi2_independence(table) > 0.01


def _pot(params, secrets, choices, seed=0, backend="plain", adversaries=None):
    link, ctxs = contexts(seed, ("sender", "receiver"), zk=ZkConfig(4, "real"), adversaries=adversaries)
    return run_parties({"sender": pot_send(ctxs["sender"], secrets, params, backend),
                        "receiver": pot_receive(ctxs["receiver"], choices, params, backend)}, link)


def test_parallel_honest_and_merged(rng):
    params = QotParams(16, 3 / 8, 4)
    secrets = rng.integers(0, 2, (4, 2, 4), dtype=np.uint8)
    c = np.array([0, 1, 1, 0])
    res = _pot(params, secrets, c)
    assert not res.aborted
    assert np.array_equal(res.outputs["receiver"], secrets[np.arange(4), c])
    msgs = [r["msg"] for r in res.records]
    assert msgs.count("COMMITS") == 1 and msgs.count("QUBITS") == 1
    zk_layers = {r["layer"] for r in res.records if r["layer"].rsplit("/", 1)[-1].startswith("zk#")}
    assert len(zk_layers) == 1


def test_parallel_cheating_in_one_instance_aborts_all(rng):
    params = QotParams(32, 3 / 8, 4)
    n = params.n

    def flip_instance_2(value, ctx, **info):
        theta, x = value
        x = np.array(x, dtype=np.uint8)
        x[2 * n:3 * n] ^= 1
        return theta, x

    adv = AdversaryStrategy("cheat-2", "bbcs", "receiver", {"bbcs.commit-bases": flip_instance_2})
    secrets = rng.integers(0, 2, (4, 2, 4), dtype=np.uint8)
    for seed in range(5):
        res = _pot(params, secrets, [0, 1, 0, 1], seed=seed, backend="ideal", adversaries={"receiver": adv})
        assert res.aborted
        assert all(not isinstance(v, np.ndarray) for v in res.outputs.values())


def test_fpot_reveal_and_repeat_ignored(rng):
    link = InProcessLink()
    oracle = FPot("pot", link)
    x = rng.integers(0, 2, (3, 2, 5), dtype=np.uint8)
    oracle.handle("receiver", "RECEIVER", {"c": [0, 1, 0]})  # before the sender: ignored
    assert not oracle.answered
    oracle.handle("sender", "SENDER", {"x": x})
    oracle.handle("sender", "SENDER", {"x": np.zeros_like(x)})  # repeated: ignored
    oracle.handle("receiver", "RECEIVER", {"c": [0, 1, 0]})
    assert oracle.answered
    assert np.array_equal(oracle.pairs, x)


@pytest.mark.parametrize("seed", range(3))
def test_fpot_matches_real_parallel_ot(seed):
    rng = np.random.default_rng(seed)
    params = QotParams(16, 3 / 8, 3)
    secrets = rng.integers(0, 2, (3, 2, 3), dtype=np.uint8)
    c = rng.integers(0, 2, 3)
    outs = []
    for ot in (ParallelOt(), ParallelOt("bbcs", params, "plain")):
        link, ctxs = contexts(seed, ("sender", "receiver"), zk=ZkConfig(4, "real"))
        res = run_parties({"sender": ot.send(ctxs["sender"], secrets),
                           "receiver": ot.receive(ctxs["receiver"], c)}, link)
        outs.append(res.outputs["receiver"])
    assert np.array_equal(outs[0], outs[1])
    assert np.array_equal(outs[0], secrets[np.arange(3), c])


def test_parallel_ot_kind_validation():
    with pytest.raises(ValueError):
        ParallelOt("magic")
    with pytest.raises(ValueError):
        ParallelOt("bbcs")
