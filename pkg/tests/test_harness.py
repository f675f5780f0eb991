import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from miniqot.bbcs import QotParams
from miniqot.harness.adversary import (AdversaryStrategy, BbcsProtocol, CdsProtocol, Histogram, Outcome, honest,
                                       run_adversarial, trial_seeds)
from miniqot.harness.entropy import binary_entropy, config_budgets, entropy_budget
from miniqot.harness.report import format_table, load_results, main as report_main
from miniqot.harness.simulators import KINDS, hamming_choice, simulator_fixture
from miniqot.harness.stats import (StatTest, binomial_upper, chi2_independence, hoeffding_ceiling,
                                   hoeffding_radius, write_results)
from miniqot.harness.strategies import equivocating_committer, guess_committing_receiver
from miniqot.params import PRESETS


# -- stats -----------------------------------------------------------------------

def test_hoeffding_radius_values():
    assert hoeffding_radius(2000, 0.99) == pytest.approx(math.sqrt(math.log(200) / 4000))
    assert hoeffding_radius(2000, 0.99, two_sided=False) < hoeffding_radius(2000, 0.99)
    assert hoeffding_ceiling(2 ** -8, 2000, 0.99) == 75


@given(st.integers(1, 10_000), st.floats(0.5, 0.999))
def test_hoeffding_radius_monotone(N, conf):
    assert hoeffding_radius(N + 1, conf) < hoeffding_radius(N, conf)


def test_binomial_upper():
    assert binomial_upper(5, 5) == 1.0
    assert 0 < binomial_upper(0, 100) < 0.05
    assert binomial_upper(10, 100) > 0.1


def test_chi2_independence():
    assert chi2_independence([[50, 50], [50, 50]]) == pytest.approx(1.0)
    assert chi2_independence([[100, 0], [0, 100]]) < 1e-10
    assert chi2_independence([[10, 0], [5, 0]]) == 1.0


def test_stat_test_kinds(tmp_path):
    rng = np.random.default_rng(0)
    flips = lambda s: np.random.default_rng(s).random() < 0.5
    r = StatTest("coin", 2000, flips, target=0.5, tolerance=0.04).run()
    assert r.passed and "PASS coin" in r.line()
    r = StatTest("rare", 500, lambda s: np.random.default_rng(s).random() < 0.01, upper=0.02).run()
    assert r.passed
    r = StatTest("too-often", 500, flips, bound="binomial", upper=0.3).run()
    assert not r.passed and r.line().startswith("FAIL")
    r = StatTest("indep", 1000, lambda s: (s % 3, np.random.default_rng(s).random() < 0.3), bound="chi2").run()
    assert r.passed
    with pytest.raises(ValueError):
        StatTest("x", 1, flips)
    with pytest.raises(ValueError):
        StatTest("x", 1, flips, bound="binomial")
    with pytest.raises(ValueError):
        StatTest("x", 1, flips, bound="z")
    path = tmp_path / "r.jsonl"
    write_results([r], path)
    rows = load_results(path)
    assert rows[0]["test"] == "indep" and rows[0]["pass"] is True
    assert "1/1 passed" in format_table(rows)
    assert report_main([str(path)]) == 0
    path.write_text(json.dumps({"test": "x"}) + "\n")
    with pytest.raises(ValueError):
        load_results(path)


# -- entropy ---------------------------------------------------------------------

def test_binary_entropy():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0) == binary_entropy(1) == 0.0
    assert binary_entropy(0.11) == pytest.approx(0.4999, abs=1e-3)


def test_entropy_budget_asymptotics():
    small = entropy_budget(256, 3 / 8, 0.04, 0.05, 0.02, 32)
    big = entropy_budget(10 ** 8, 3 / 8, 0.04, 0.05, 0.02, 32)
    assert big.eps_total < 1e-10 < small.eps_total
    assert big.feasible and big.margin > 0
    assert not entropy_budget(64, 3 / 8, 0.1, 0.1, 0.1, 32).feasible
    assert not entropy_budget(10 ** 8, 3 / 8, 0.0, 0.05, 0.02, 32).feasible
    assert "INFEASIBLE" in entropy_budget(64, 3 / 8, 0.1, 0.1, 0.1, 32).summary()
    for bad in [(0, 0.5, .1, .1, .1, 1), (10, 1.0, .1, .1, .1, 1), (10, 0.5, -.1, .1, .1, 1)]:
        with pytest.raises(ValueError):
            entropy_budget(*bad)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_feasible(name):
    for layer, b in config_budgets(PRESETS[name]).items():
        assert b.feasible, (name, layer, b.summary())


@given(st.integers(100, 100_000))
def test_budget_monotone_in_n(n):
    a = entropy_budget(n, 0.375, 0.01, 0.05, 0.02, 16)
    b = entropy_budget(2 * n, 0.375, 0.01, 0.05, 0.02, 16)
    assert b.eps_total <= a.eps_total
    assert b.margin >= a.margin


# -- adversary plumbing ------------------------------------------------------------

def test_trial_seeds_reproducible():
    assert trial_seeds(3, 5) == trial_seeds(3, 5)
    assert len(set(trial_seeds(3, 100))) == 100


def test_histogram():
    h = Histogram([Outcome("success"), Outcome("abort", "x"), Outcome("abort", "x"), Outcome("mismatch")])
    assert h["abort(x)"] == 2 and h.trials == 4 and h.abort_rate == 0.5


def test_strategy_validation():
    with pytest.raises(ValueError):
        AdversaryStrategy("x", "bbcs", "god")
    p = BbcsProtocol(QotParams(16, 3 / 8, 2))
    with pytest.raises(ValueError):
        run_adversarial(p, equivocating_committer(), 1)
    with pytest.raises(ValueError):
        run_adversarial(p, honest("bbcs", "committer"), 1)
    with pytest.raises(ValueError):
        equivocating_committer("nope")


def test_strategy_crash_is_reported():
    def boom(value, ctx, **info):
        raise RuntimeError("bug in strategy")

    s = AdversaryStrategy("boom", "bbcs", "receiver", {"bbcs.measure": boom})
    h = run_adversarial(BbcsProtocol(QotParams(16, 3 / 8, 2)), s, 3)
    assert h["strategy-crash"] == 3


def test_guess_committing_histogram():
    p = BbcsProtocol(QotParams(24, 1 / 3, 4))
    h = run_adversarial(p, guess_committing_receiver(), 300, seed=1)
    # a receiver that never measured decodes garbage when it slips through
    assert set(h) <= {"success", "mismatch"} | {k for k in h if k.startswith("abort(")}
    assert abs(h.abort_rate - (1 - 0.75 ** 8)) < 3 * math.sqrt(0.1 * 0.9 / 300)


# -- simulators --------------------------------------------------------------------

def test_unknown_simulator():
    with pytest.raises(ValueError):
        simulator_fixture("oracle-of-delphi")
    assert len(KINDS) == len(set(KINDS))


def test_hamming_choice_tie_goes_to_zero():
    a = np.array([0, 1, 0, 1], np.uint8)
    b = np.array([1, 1, 1, 1], np.uint8)
    assert hamming_choice(a, b, [0, 1], [2, 3]) == 0
    assert hamming_choice(a, b, [1, 3], [0, 2]) == 0
    assert hamming_choice(a, b, [0, 2], [1, 3]) == 1


def _tamper(value, ctx, **info):
    v = np.array(value, dtype=np.uint8)
    v.reshape(-1)[0] ^= 1
    return v


@pytest.mark.parametrize("tampered", [False, True])
def test_qot_sender_sim_exhaustive(tampered):
    """Every pair of 2-bit secrets, both choices: the extracted pair decodes what the sender sent."""
    sim = simulator_fixture("qot-sender-sim")
    sender = AdversaryStrategy("tamper", "bbcs", "sender", {"bbcs.transfer": _tamper}) if tampered else None
    pairs = [np.array(p, np.uint8) for p in itertools.product((0, 1), repeat=2)]
    for i, (s0, s1, c) in enumerate(itertools.product(pairs, pairs, (0, 1))):
        rep = sim.run(i, s0=s0, s1=s1, sender=sender, choice=c)
        assert rep.ok, rep.details
        if not tampered:
            assert np.array_equal(rep.details["extracted"], np.stack([s0, s1]))


def test_qot_receiver_sim():
    sim = simulator_fixture("qot-receiver-sim")
    reports = [sim.run(seed) for seed in range(1000)]
    assert sum(r.ok for r in reports) == 1000
    assert {r.details["c"] for r in reports} == {0, 1}


def test_qot_receiver_sim_against_guessing_receiver():
    sim = simulator_fixture("qot-receiver-sim")
    reps = [sim.run(seed, receiver=guess_committing_receiver()) for seed in range(50)]
    passed = [r for r in reps if not r.details["aborts"]]
    assert passed and all(r.details["extracted"] in (0, 1) for r in passed)


def test_cds_honest_protocol_runner():
    h = run_adversarial(CdsProtocol(lam=6), honest("cds", "receiver"), 20)
    assert h["success"] == 20
