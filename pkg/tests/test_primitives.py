import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from miniqot import bits as B
from miniqot.circuit import (AND, XOR, BooleanCircuit, CircuitBuilder, MalformedCircuit, eval_circuit,
                             random_circuit, truth_table_eval)
from miniqot.naor import (NaorCommitment, all_expansions, ambiguous_rho, commit_many, commit_string,
                          naor_commit, naor_verify, verify_many, verify_string)
from miniqot.prg import (CIRCUIT_FRIENDLY, FAST, Prg, arx_block, arx_block_int, cf_expand, cf_expand_words,
                         cf_prg_circuit, prg_expand)
from miniqot.uhash import UniversalHash, uh_apply, uh_sample

bitlists = st.lists(st.integers(0, 1), max_size=200)


# -- bitstrings ---------------------------------------------------------------

@given(bitlists)
def test_serialize_roundtrip(bits):
    data = B.serialize(bits)
    back, off = B.deserialize(data)
    assert off == len(data)
    assert back.tolist() == bits


def test_serialize_layout():
    data = B.serialize([1, 0, 1, 1, 0, 0, 0, 0, 1])
    assert data[:4] == (9).to_bytes(4, "little")
    assert data[4:] == bytes([0b00001101, 0b00000001])


@given(st.integers(0, 2**40 - 1))
def test_int_roundtrip(v):
    assert B.to_int(B.from_int(v, 40)) == v


def test_bits_rejects_non_binary():
    with pytest.raises(ValueError):
        B.as_bits([0, 2])
    with pytest.raises(ValueError):
        B.deserialize(b"\x10\x00\x00\x00\x01")


# -- PRG ----------------------------------------------------------------------

@pytest.mark.parametrize("variant,lam", [(FAST, 16), (CIRCUIT_FRIENDLY, 16), (CIRCUIT_FRIENDLY, 5)])
def test_prg_deterministic_and_length(variant, lam, rng):
    g = Prg(variant, lam, 3 * lam + 7)
    seed = B.random_bits(rng, lam)
    out = prg_expand(g, seed)
    assert out.shape == (3 * lam + 7,)
    assert np.array_equal(out, g.expand(seed.copy()))
    with pytest.raises(ValueError):
        g.expand(B.random_bits(rng, lam + 1))


def test_prg_circuit_matches_expand_random_seeds(rng):
    lam = 16
    circ = cf_prg_circuit(lam, 3 * lam)
    seeds = rng.integers(0, 2, size=(100, lam), dtype=np.uint8)
    got = eval_circuit(circ, seeds)
    expect = np.array([cf_expand(s, 3 * lam) for s in seeds])
    assert np.array_equal(got, expect)


@pytest.mark.parametrize("lam", [4, 6, 8, 10])
def test_prg_circuit_exhaustive_small_lambda(lam):
    circ = cf_prg_circuit(lam, 3 * lam)
    seeds = B.words_to_bits(np.arange(1 << lam), lam)
    assert np.array_equal(eval_circuit(circ, seeds), cf_expand_words(np.arange(1 << lam), 3 * lam, lam))


def test_arx_backends_agree(rng):
    width = 16
    s = rng.integers(0, 1 << width, size=(4, 500), dtype=np.uint64)
    a = arx_block(*s, width, backend="numpy")
    b = arx_block(*s, width, backend="numba")
    assert np.array_equal(a, b)
    for k in range(5):
        assert tuple(int(v) for v in a[k]) == arx_block_int(*(int(v) for v in s[:, k]), width)


def test_prg_rejects_bad_variant_and_width():
    with pytest.raises(ValueError):
        Prg("sha3", 8, 24)
    with pytest.raises(ValueError):
        Prg(CIRCUIT_FRIENDLY, 40, 120)


# -- Naor ---------------------------------------------------------------------

def test_naor_definition(rng):
    lam = 8
    rho, r = B.random_bits(rng, 3 * lam), B.random_bits(rng, lam)
    g = cf_expand(r, 3 * lam)
    assert np.array_equal(naor_commit(rho, 0, r), g)
    assert np.array_equal(naor_commit(rho, 1, r), g ^ rho)


@given(st.integers(0, 2**32), st.integers(1, 5))
def test_naor_string_roundtrip(seed, L):
    rng = np.random.default_rng(seed)
    lam = 8
    rho, r, m = B.random_bits(rng, 3 * lam), B.random_bits(rng, lam), B.random_bits(rng, L)
    c = commit_string(rho, m, r)
    assert verify_string(rho, c, m, r)
    flipped = c.copy()
    flipped[int(rng.integers(0, c.size))] ^= 1
    assert not verify_string(rho, flipped, m, r)


def test_naor_bit_commitment_object(rng):
    lam = 6
    rho = B.random_bits(rng, 3 * lam)
    com = NaorCommitment.create(rho, 1, B.random_bits(rng, lam))
    assert com.verify()
    assert not naor_verify(rho, com.c, 0, com.r)
    assert not naor_verify(rho, com.c, 2, com.r)
    with pytest.raises(ValueError):
        naor_commit(rho, 3, com.r)


def test_commit_many_matches_rowwise(rng):
    lam, N, L = 8, 12, 3
    rho = B.random_bits(rng, 3 * lam)
    msgs = rng.integers(0, 2, size=(N, L), dtype=np.uint8)
    seeds = rng.integers(0, 2, size=(N, lam), dtype=np.uint8)
    cs = commit_many(rho, msgs, seeds)
    for i in range(N):
        assert np.array_equal(cs[i], commit_string(rho, msgs[i], seeds[i]))
    assert verify_many(rho, cs, msgs, seeds).all()


def test_ambiguous_rho_oracle_small_lambda():
    lam = 4
    table = all_expansions(lam)
    rho = table[3] ^ table[9]
    assert ambiguous_rho(rho, lam)
    # brute force over all pairs agrees with the fast check
    rng = np.random.default_rng(1)
    keys = {tuple(a ^ b) for a in table for b in table}
    for _ in range(200):
        rho = B.random_bits(rng, 3 * lam)
        assert ambiguous_rho(rho, lam) == (tuple(rho) in keys)


def test_ambiguous_fraction_lambda6(rng):
    lam, N = 6, 2000
    hits = sum(ambiguous_rho(B.random_bits(rng, 3 * lam), lam) for _ in range(N))
    # at most 2^(2λ) of 2^(3λ) strings are ambiguous
    assert hits / N <= 2.0 ** -lam + 0.01


# -- universal hashing --------------------------------------------------------

def test_uhash_zero_and_linearity(rng):
    f = uh_sample(rng, 40, 12)
    assert not uh_apply(f, B.zeros(40)).any()
    for _ in range(50):
        x, y = B.random_bits(rng, 40), B.random_bits(rng, 40)
        assert np.array_equal(f.apply(x ^ y), f.apply(x) ^ f.apply(y))


def test_uhash_exact_two_universal_n8_l4():
    n, ell = 8, 4
    descs = B.words_to_bits(np.arange(1 << (n + ell - 1)), n + ell - 1)
    zs = B.words_to_bits(np.arange(1, 1 << n), n)
    for z in zs:
        hits = sum(not UniversalHash(d, n, ell).apply(z).any() for d in descs[::1])
        assert hits * (1 << ell) == len(descs)


def test_uhash_collision_rate(rng):
    n, ell, N = 32, 6, 100_000
    descs = rng.integers(0, 2, size=(N, n + ell - 1), dtype=np.uint8)
    z = rng.integers(0, 2, size=(N, n), dtype=np.uint8)
    z[~z.any(axis=1), 0] = 1
    # T z = 0 iff x and y = x ^ z collide
    win = np.lib.stride_tricks.sliding_window_view(descs, n, axis=1)[:, :ell, ::-1]
    collide = ~((np.einsum("kij,kj->ki", win.astype(np.int64), z.astype(np.int64)) & 1).any(axis=1))
    p = 2.0 ** -ell
    assert abs(collide.mean() - p) <= 3 * np.sqrt(p * (1 - p) / N)


def test_uhash_serialization(rng):
    f = uh_sample(rng, 20, 5)
    g = UniversalHash.deserialize(f.serialize())
    x = B.random_bits(rng, 20)
    assert np.array_equal(f.apply(x), g.apply(x))
    with pytest.raises(ValueError):
        f.apply(B.zeros(19))


# -- circuits -----------------------------------------------------------------

def test_and_xor_gates():
    and_c = BooleanCircuit(2, [AND], [0], [1], [2])
    xor_c = BooleanCircuit(2, [XOR], [0], [1], [2])
    for x in itertools.product([0, 1], repeat=2):
        assert eval_circuit(and_c, x)[0] == (x[0] & x[1])
        assert eval_circuit(xor_c, x)[0] == (x[0] ^ x[1])


@pytest.mark.parametrize("backend", ["numpy", "numba"])
def test_random_circuits_match_interpreter(backend, rng):
    for _ in range(20):
        c = random_circuit(rng, 6, 32, n_outputs=3)
        xs = B.words_to_bits(np.arange(64), 6)
        got = eval_circuit(c, xs, backend=backend)
        assert np.array_equal(got, np.array([truth_table_eval(c, x) for x in xs]))


def test_malformed_circuits_rejected():
    with pytest.raises(MalformedCircuit):
        BooleanCircuit(2, [AND], [0], [2], [2])
    with pytest.raises(MalformedCircuit):
        BooleanCircuit(2, [AND], [0], [1], [5])
    with pytest.raises(ValueError):
        eval_circuit(BooleanCircuit(2, [AND], [0], [1], [2]), [1, 0, 1])


@given(st.integers(0, 2**16 - 1), st.integers(0, 2**16 - 1))
def test_builder_word_add(x, y):
    cb = CircuitBuilder(32)
    ins = cb.inputs
    c = cb.build(cb.add_w(ins[:16], ins[16:]))
    out = eval_circuit(c, np.concatenate([B.from_int(x, 16), B.from_int(y, 16)]))
    assert B.to_int(out) == (x + y) % (1 << 16)
