import numpy as np
import pytest

from helpers import contexts, run_commitment
from miniqot import socom
from miniqot.context import ZkConfig
from miniqot.harness.adversary import AdversaryStrategy, CommitProtocol, run_adversarial
from miniqot.harness.extract import AMBIGUOUS, NO_OPENING, OK, brute_force_extract
from miniqot.harness.simulators import simulator_fixture
from miniqot.naor import all_expansions, ambiguous_rho, commit_many
from miniqot.socom import SoComUsageError, check_index_set
from miniqot.transport.runtime import run_parties


@pytest.mark.parametrize("kind", ["plain", "ideal"])
def test_open_all_roundtrip(kind, rng):
    m = rng.integers(0, 2, (5, 3), dtype=np.uint8)
    res = run_commitment(kind, m, np.arange(5), seed=1)
    assert not res.aborted
    assert np.array_equal(res.outputs["receiver"], m)
    assert np.array_equal(res.outputs["committer"], np.arange(5))


def test_open_subset(rng):
    m = rng.integers(0, 2, (4, 2), dtype=np.uint8)
    res = run_commitment("plain", m, [1, 3], seed=2)
    assert np.array_equal(res.outputs["receiver"], m[[1, 3]])


def test_open_empty_set(rng):
    m = rng.integers(0, 2, (3, 2), dtype=np.uint8)
    res = run_commitment("plain", m, [], seed=3)
    assert not res.aborted and res.outputs["receiver"].shape == (0, 2)


def _session(kind, twice):
    link, ctxs = contexts(0, ("committer", "receiver"))
    Committer, Receiver = socom.backend(kind)
    com, rec = Committer(ctxs["committer"]), Receiver(ctxs["receiver"])
    m = np.zeros((2, 2), np.uint8)

    def committer():
        yield from com.commit(m)
        if twice == "commit":
            yield from com.commit(m)
        yield from com.open()

    def receiver():
        yield from rec.receive()
        yield from rec.open([0])
        if twice == "open":
            yield from rec.open([1])

    return run_parties({"committer": committer(), "receiver": receiver()}, link)


@pytest.mark.parametrize("kind", ["plain", "ideal"])
@pytest.mark.parametrize("twice", ["commit", "open"])
def test_double_commit_and_double_open_rejected(kind, twice):
    with pytest.raises(SoComUsageError):
        _session(kind, twice)


def test_open_out_of_range():
    _, ctxs = contexts(0, ("committer", "receiver"))
    rec = socom.SoComReceiver(ctxs["receiver"])
    rec.k, rec.L, rec.phase = 2, 2, "committed"
    with pytest.raises(ValueError):
        list(rec.open([5]))


def test_index_set_validation():
    assert check_index_set([3, 1], 4).tolist() == [1, 3]
    with pytest.raises(ValueError):
        check_index_set([4], 4)
    with pytest.raises(ValueError):
        check_index_set([1, 1], 4)


def test_oracle_equivalence_ideal_zk(rng):
    """Protocol and functionality agree on (outputs, aborts) for honest parties."""
    for seed in range(1000):
        k = int(rng.integers(1, 6))
        m = rng.integers(0, 2, (k, 2), dtype=np.uint8)
        I = np.flatnonzero(rng.integers(0, 2, k))
        real = run_commitment("plain", m, I, seed=seed, zk=ZkConfig(6, "ideal"))
        ideal = run_commitment("ideal", m, I, seed=seed)
        assert real.aborted == ideal.aborted == False  # noqa: E712
        assert np.array_equal(real.outputs["receiver"], ideal.outputs["receiver"])
        assert np.array_equal(real.outputs["committer"], ideal.outputs["committer"])


def test_oracle_equivalence_real_zk(rng):
    for seed in range(1000):
        m = rng.integers(0, 2, (4, 2), dtype=np.uint8)
        I = np.flatnonzero(rng.integers(0, 2, 4))
        real = run_commitment("plain", m, I, seed=seed, zk=ZkConfig(4, "real"))
        assert not real.aborted and np.array_equal(real.outputs["receiver"], m[I])


def test_substituted_message_rejected():
    """Revealing a different message makes the proof statement false."""
    from miniqot.harness.strategies import equivocating_committer
    strat = equivocating_committer("reveal")
    strat = AdversaryStrategy("substitute", "socom", "committer", {"socom.reveal": strat.hooks["ecom.reveal"]})
    proto = CommitProtocol("plain", lam=8, k=4, L=2, zk=ZkConfig(10, "real"), open_all=True)
    h = run_adversarial(proto, strat, 200, seed=4)
    assert h.rate(lambda o: o.kind == "abort") >= 1 - ((2 / 3) ** 10 + 0.05)
    assert h["mismatch"] == 0


def test_cheating_prover_substitution_rate():
    from miniqot.harness.strategies import equivocating_committer
    base = equivocating_committer("reveal", cheat_zk=True).hooks
    strat = AdversaryStrategy("substitute-and-cheat", "socom", "committer",
                              {"socom.reveal": base["ecom.reveal"], "zk.flip-party": base["zk.flip-party"]})
    proto = CommitProtocol("plain", lam=8, k=4, L=2, zk=ZkConfig(10, "real"), open_all=True)
    h = run_adversarial(proto, strat, 300, seed=5)
    assert h.rate(lambda o: o.kind == "abort") >= 1 - ((2 / 3) ** 10 + 0.05)


# -- brute-force extraction -------------------------------------------------

def test_extract_honest_lambda6(rng):
    lam = 6
    for _ in range(20):
        rho = rng.integers(0, 2, 3 * lam, dtype=np.uint8)
        if ambiguous_rho(rho, lam):
            continue
        m = rng.integers(0, 2, (5, 2), dtype=np.uint8)
        cs = commit_many(rho, m, rng.integers(0, 2, (5, lam), dtype=np.uint8))
        ext = brute_force_extract(rho, cs, lam)
        assert ext.unique and np.array_equal(ext.messages, m)


def test_extract_ambiguous_constructed():
    lam = 6
    table = all_expansions(lam)
    rho = table[5] ^ table[40]
    ext = brute_force_extract(rho, table[5][None, :], lam)
    assert ext.status == [AMBIGUOUS]
    assert sorted(int(m[0]) for m, _ in ext.openings[0]) == [0, 1]


def test_extract_no_opening(rng):
    lam = 6
    table = all_expansions(lam)
    rho = rng.integers(0, 2, 3 * lam, dtype=np.uint8)
    keys = {tuple(t) for t in table} | {tuple(t ^ rho) for t in table}
    while True:
        c = rng.integers(0, 2, 3 * lam, dtype=np.uint8)
        if tuple(c) not in keys:
            break
    assert brute_force_extract(rho, c[None, :], lam).status == [NO_OPENING]


def test_extract_limits():
    with pytest.raises(ValueError):
        brute_force_extract(np.zeros(39, np.uint8), np.zeros((1, 39), np.uint8), 13)


def test_binding_lambda6_unique_openings(rng):
    lam = 6
    seen = 0
    for _ in range(40):
        rho = rng.integers(0, 2, 3 * lam, dtype=np.uint8)
        if ambiguous_rho(rho, lam):
            continue
        seen += 1
        m = rng.integers(0, 2, (3, 1), dtype=np.uint8)
        cs = commit_many(rho, m, rng.integers(0, 2, (3, lam), dtype=np.uint8))
        assert brute_force_extract(rho, cs, lam).status == [OK] * 3
    assert seen > 30


# -- simulators -------------------------------------------------------------

def test_sender_simulator_extracts_opened_messages():
    sim = simulator_fixture("socom-sender-sim")
    reports = [sim.run(seed) for seed in range(30)]
    assert all(r.ok for r in reports)


def test_receiver_simulator_accepted():
    sim = simulator_fixture("socom-receiver-sim")
    assert all(sim.run(seed).ok for seed in range(100))
