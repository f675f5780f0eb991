import numpy as np
import pytest
from scipy.stats import chi2_contingency

from miniqot.bbcs import QotParams
from miniqot.harness.modes import exact_mode_distributions, mode_contingency
from miniqot.harness.stats import chi2_independence
from miniqot.qsim import PLUS, TIMES, Broker, DeadHandle, DoubleMeasure, NotOwner


def test_same_basis_determinism():
    b = Broker(1)
    assert b.measure("A", b.prepare("A", 1, PLUS), PLUS) == 1
    assert b.measure("A", b.prepare("A", 0, TIMES), TIMES) == 0
    xs = np.random.default_rng(0).integers(0, 2, 1000)
    th = np.random.default_rng(1).integers(0, 2, 1000)
    h = b.prepare_batch("A", xs, th)
    assert np.array_equal(b.measure_batch("A", h, th), xs)


@pytest.mark.parametrize("x", [0, 1])
def test_conjugate_basis_uniform(x):
    b = Broker(7)
    N = 10_000
    h = b.prepare_batch("A", np.full(N, x), np.full(N, PLUS))
    p = b.measure_batch("A", h, np.full(N, TIMES)).mean()
    assert abs(p - 0.5) <= 0.02


def test_transmit_ownership():
    b = Broker(0)
    h = b.prepare("A", 1, PLUS)
    h2 = b.transmit("A", h, "B")
    with pytest.raises(NotOwner):
        b.measure("A", h, PLUS)
    with pytest.raises(DeadHandle):
        b.transmit("A", h, "B")
    assert b.measure("B", h2, PLUS) == 1
    with pytest.raises(NotOwner):
        b.measure("A", h2, PLUS)


def test_measure_once():
    b = Broker(0)
    h = b.prepare("A", 0, PLUS)
    b.measure("A", h, TIMES)
    with pytest.raises(DoubleMeasure):
        b.measure("A", h, PLUS)
    with pytest.raises(DeadHandle):
        b.transmit("A", h, "B")
    a, c = b.epr_pair("A")
    b.measure("A", a, PLUS)
    with pytest.raises(DoubleMeasure):
        b.measure("A", a, PLUS)


def test_epr_same_basis_correlation():
    b = Broker(3)
    N = 10_000
    a, c = b.epr_batch("A", N)
    bases = np.random.default_rng(2).integers(0, 2, N)
    oa = b.measure_batch("A", a, bases)
    oc = b.measure_batch("A", c, bases)
    assert np.array_equal(oa, oc)
    assert abs(oa.mean() - 0.5) < 0.02


def test_epr_different_bases_independent():
    b = Broker(4)
    N = 10_000
    a, c = b.epr_batch("A", N)
    oa = b.measure_batch("A", a, np.zeros(N))
    oc = b.measure_batch("A", c, np.ones(N))
    table = np.histogram2d(oa, oc, bins=2)[0]
    assert chi2_contingency(table)[1] > 0.01


def test_handles_fresh():
    b = Broker(5)
    a, c = b.epr_batch("A", 10_000)
    assert np.unique(np.concatenate([a, c])).size == 20_000
    b.measure_batch("A", a, np.zeros(10_000))
    b.measure_batch("A", c, np.zeros(10_000))
    assert b.live_count() == 0


def test_broker_seed_reproducible():
    outs = []
    for _ in range(2):
        b = Broker(11)
        h = b.prepare_batch("A", np.zeros(500), np.zeros(500))
        outs.append(b.measure_batch("A", h, np.ones(500)))
    assert np.array_equal(*outs)


def test_biased_measurement_hook():
    b = Broker(6)
    N = 4000
    h = b.prepare_batch("A", np.ones(N), np.zeros(N))
    p_one = np.array([[0.0, 0.9], [0.5, 0.5]])
    assert abs(b.measure_biased("A", h, p_one).mean() - 0.9) < 0.03
    a, _ = b.epr_pair("A")
    with pytest.raises(Exception):
        b.measure_biased("A", [a], p_one)


@pytest.mark.parametrize("seeds", [(0, 100), (1, 101), (2, 102), (3, 103)])
def test_epr_mode_exact_equivalence_n3(seeds):
    d = exact_mode_distributions(QotParams(3, 3 / 8, 1), *seeds)
    assert sum(d["prepare"].values()) == sum(d["epr"].values()) == 64
    assert d["prepare"] == d["epr"]


def test_epr_mode_chi2_n16():
    table = mode_contingency(QotParams(16, 3 / 8, 4), 300, seed=5)
    # same basis never disagrees in either mode
    assert table[:, 5].sum() == table[:, 6].sum() == 0
    assert chi2_independence(table) > 0.01
