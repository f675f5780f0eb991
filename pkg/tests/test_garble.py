import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from miniqot import bits as B
from miniqot.circuit import AND, BooleanCircuit, eval_circuit, random_circuit
from miniqot.garble import EvaluationFailure, GarbleError, GarbledCircuit, enc, garb, garbsim, geval

AND_C = BooleanCircuit(2, [AND], [0], [1], [2])


def _all_inputs(n):
    return B.words_to_bits(np.arange(1 << n), n)


def test_garb_deterministic(rng):
    c = random_circuit(rng, 5, 20, 2)
    seed = B.random_bits(rng, 16)
    a, ea = garb(c, seed)
    b, eb = garb(c, seed.copy())
    assert a.serialize() == b.serialize() and np.array_equal(ea, eb)
    other, _ = garb(c, seed ^ np.eye(1, 16, 3, dtype=np.uint8)[0])
    assert other.serialize() != a.serialize()


def test_and_gate(rng):
    gc, e = garb(AND_C, B.random_bits(rng, 16))
    for x in itertools.product((0, 1), repeat=2):
        assert geval(gc, enc(e, x))[0] == (x[0] & x[1])


def test_random_circuits_exhaustive(rng):
    for _ in range(100):
        n_in = int(rng.integers(1, 9))
        c = random_circuit(rng, n_in, int(rng.integers(1, 33)), int(rng.integers(1, 4)))
        gc, e = garb(c, B.random_bits(rng, 16))
        xs = _all_inputs(n_in)
        expect = eval_circuit(c, xs)
        for x, y in zip(xs, expect):
            assert np.array_equal(geval(gc, enc(e, x)), y)


@given(st.integers(0, 2**32 - 1))
def test_garbler_inputs(seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng, 6, 24, 2)
    g = B.random_bits(rng, 2)
    gc, e = garb(c, B.random_bits(rng, 12), g, 2)
    for x in _all_inputs(4):
        assert np.array_equal(geval(gc, enc(e, x)), eval_circuit(c, np.concatenate([x, g])))


def test_serialization_roundtrip(rng):
    gc, e = garb(random_circuit(rng, 4, 16, 2), B.random_bits(rng, 16))
    back = GarbledCircuit.deserialize(gc.serialize())
    assert back.serialize() == gc.serialize()
    for x in _all_inputs(4):
        assert np.array_equal(geval(back, enc(e, x)), geval(gc, enc(e, x)))
    with pytest.raises(GarbleError):
        GarbledCircuit.deserialize(gc.serialize() + b"\x00")


def test_enc_wrong_length(rng):
    _, e = garb(AND_C, B.random_bits(rng, 16))
    with pytest.raises(GarbleError):
        enc(e, [1])


def test_corrupted_label_never_silent(rng):
    lam = 16
    silent = failures = 0
    for _ in range(10_000):
        n_in = 4
        c = random_circuit(rng, n_in, 12, 1)
        gc, e = garb(c, B.random_bits(rng, lam))
        x = B.random_bits(rng, n_in)
        xhat = enc(e, x).copy()
        xhat[int(rng.integers(0, n_in))] ^= np.uint64(1) << np.uint64(int(rng.integers(0, lam)))
        try:
            y = geval(gc, xhat)
        except EvaluationFailure:
            failures += 1
            continue
        silent += int(not np.array_equal(y, eval_circuit(c, x)))
    assert silent == 0
    assert failures > 5000  # unused input wires account for the rest


def test_garbsim_evaluates_to_y(rng):
    for _ in range(50):
        c = random_circuit(rng, 5, 20, 3)
        y = B.random_bits(rng, 3)
        gc, xhat = garbsim(c, y, rng, 16)
        assert np.array_equal(geval(gc, xhat), y)


def test_garbsim_size_profile(rng):
    c = random_circuit(rng, 6, 30, 2)
    real, _ = garb(c, B.random_bits(rng, 16))
    sim, _ = garbsim(c, B.random_bits(rng, 2), rng, 16)
    assert len(real.serialize()) == len(sim.serialize())
    assert real.tables.shape == sim.tables.shape and real.decode.shape == sim.decode.shape


def _reuse_count(gc, xhat):
    words = np.concatenate([gc.tables.reshape(-1), gc.garbler_labels, gc.decode.reshape(-1), xhat])
    return words.size - np.unique(words).size


def test_weak_distinguisher(rng):
    """A label-reuse counter cannot tell real from simulated garblings."""
    lam, N = 8, 2000
    c = random_circuit(rng, 4, 16, 1)
    feats, labels = [], []
    for i in range(N):
        x = B.random_bits(rng, 4)
        if i % 2:
            gc, e = garb(c, B.random_bits(rng, lam))
            xhat = enc(e, x)
        else:
            gc, xhat = garbsim(c, eval_circuit(c, x), rng, lam)
        feats.append(_reuse_count(gc, xhat))
        labels.append(i % 2)
    feats, labels = np.array(feats), np.array(labels)
    train, test = slice(0, N // 2), slice(N // 2, N)
    best = max(((feats[train] > t) == labels[train]).mean() for t in np.unique(feats))
    t_best = max(np.unique(feats), key=lambda t: ((feats[train] > t) == labels[train]).mean())
    acc = ((feats[test] > t_best) == labels[test]).mean()
    acc = max(acc, 1 - acc)
    assert acc <= 0.55, (best, acc)
