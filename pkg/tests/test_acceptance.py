"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also repeated in the terminal summary.  Runtime is about
twenty minutes on one core; every count and tolerance below is the stated one.
"""

import time

import numpy as np
import pytest

from helpers import ACCEPTANCE_LINES
from miniqot import bits as B
from miniqot.bbcs import QotParams
from miniqot.circuit import AND, CONST, BooleanCircuit, eval_circuit, random_circuit
from miniqot.cli import EXIT_OK, run_cli
from miniqot.context import ZkConfig
from miniqot.garble import enc, garb, geval
from miniqot.harness.adversary import (BbcsProtocol, CdsProtocol, CommitProtocol, ZkProtocol, honest,
                                       run_adversarial)
from miniqot.harness.modes import exact_mode_distributions, mode_contingency
from miniqot.harness.stats import StatResult, StatTest, chi2_independence, hoeffding_ceiling
from miniqot.harness.strategies import (cds_bad_instances, cds_single_bad_label, equivocating_committer,
                                        guess_committing_receiver, zk_cheating_prover)
from miniqot.naor import ambiguous_rho
from miniqot.params import LAYERS, preset
from miniqot.stack import plain_ot
from miniqot.zk.statements import circuit_statement

pytestmark = pytest.mark.acceptance


def _report(number: int, result: StatResult):
    line = f"[{number:>2}] {result.line()}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert result.passed, line


def _exact(name, N, estimate, bound, passed, detail=""):
    return StatResult(name, N, float(estimate), bound, bool(passed), 1.0, "exact", detail)


def _random_inputs(seed, ell):
    rng = np.random.default_rng([seed, 99])
    s = B.random_bits(rng, 2 * ell).reshape(2, -1)
    return s[0], s[1], int(rng.integers(0, 2))


def test_01_end_to_end_full_mode():
    cfg = preset("test", mode="full")
    t0 = time.perf_counter()
    correct = 0
    for seed in range(100):
        s0, s1, c = _random_inputs(seed, cfg.outer.ell)
        out = plain_ot(s0, s1, c, cfg.with_(seed=seed))
        correct += (not out.aborted) and np.array_equal(out.value, (s0, s1)[c])
    wall = time.perf_counter() - t0
    _report(1, _exact("full-mode OT at λ=16", 100, correct / 100, 1.0, correct == 100 and wall <= 600,
                      f"{correct}/100 correct in {wall:.0f} s (limit 600 s)"))


def test_02_cut_and_choose_detection():
    params = QotParams(24, 1 / 3, 8)
    assert params.t_check == 8
    proto, strat = BbcsProtocol(params), guess_committing_receiver()
    t = StatTest("guess-committing receiver detection, |T|=8", 5000,
                 lambda s: proto.trial(s, strat).kind == "abort", target=1 - 0.75 ** 8, tolerance=0.03)
    _report(2, t.run())


def test_03_cds_binding_bound():
    lam, N = 16, 2000
    proto, strat = CdsProtocol(lam=lam), cds_bad_instances(lam + 1)
    t = StatTest(f"CDS sender with {lam + 1} bad instances at λ={lam}", N,
                 lambda s: proto.trial(s, strat).kind != "abort", upper=2.0 ** (-lam / 2))
    r = t.run()
    assert hoeffding_ceiling(2.0 ** (-lam / 2), N) == 75
    _report(3, r)


def test_04_selective_abort_independence():
    proto, strat = CdsProtocol(lam=8, witness="random"), cds_single_bad_label(0, 0, 1)

    def trial(seed):
        o = proto.trial(seed, strat)
        assert o.kind != "mismatch"
        return int(o.data["w"][0]), o.kind == "abort"

    _report(4, StatTest("single-bad-label abort vs w_1", 5000, trial, bound="chi2").run())


def test_05_naor_binding():
    lam, N = 6, 10_000
    rng = np.random.default_rng(5)
    hits = sum(ambiguous_rho(B.random_bits(rng, 3 * lam), lam) for _ in range(N))
    _report(5, _exact("Naor ambiguous ρ at λ=6", N, hits / N, 2.0 ** -lam, hits / N <= 2.0 ** -lam,
                      f"{hits} ambiguous"))


def test_06_zk_soundness_and_completeness():
    unsat = circuit_statement(BooleanCircuit(2, [AND, CONST], [0, 0], [1, 0], [3]))
    sat = circuit_statement(BooleanCircuit(2, [AND], [0], [1], [2]))
    h = run_adversarial(ZkProtocol(unsat, np.array([1, 1], np.uint8), rounds=10), zk_cheating_prover(), 2000,
                        seed=6)
    rate = h.rate(lambda o: o.data["accepted"])
    bound = (2 / 3) ** 10 + 0.05
    g = run_adversarial(ZkProtocol(sat, np.array([1, 1], np.uint8), rounds=10), honest("zk", "prover"), 1000,
                        seed=60)
    complete = sum(o.data["accepted"] for o in g.outcomes)
    _report(6, _exact("ZK cheating acceptance at t=10", 2000, rate, bound, rate <= bound and complete == 1000,
                      f"completeness {complete}/1000"))


def test_07_garbling_oracle_equivalence():
    rng = np.random.default_rng(7)
    mismatches = checked = 0
    for _ in range(100):
        n_in = int(rng.integers(1, 9))
        c = random_circuit(rng, n_in, int(rng.integers(1, 33)), int(rng.integers(1, 4)))
        gc, e = garb(c, B.random_bits(rng, 16))
        xs = B.words_to_bits(np.arange(1 << n_in), n_in)
        for x, y in zip(xs, eval_circuit(c, xs)):
            mismatches += not np.array_equal(geval(gc, enc(e, x)), y)
            checked += 1
    _report(7, _exact("garbled vs plain evaluation, 100 circuits", checked, mismatches, 0, mismatches == 0,
                      f"{mismatches} mismatches over {checked} inputs"))


def test_08_extractability():
    h = run_adversarial(CommitProtocol(zk=ZkConfig(6, "real"), extract=True), honest("ecom", "committer"), 100,
                        seed=8)
    a = run_adversarial(CommitProtocol(extract=True, open_all=True), equivocating_committer("mixed"), 2000,
                        seed=80)
    _report(8, _exact("extraction equals opening", 2100, h["success"] / 100, 1.0,
                      h["success"] == 100 and a["mismatch"] == 0,
                      f"honest {h['success']}/100; accepted mismatches {a['mismatch']}/2000 "
                      f"(aborts {sum(v for k, v in a.items() if k.startswith('abort'))})"))


def test_09_mode_equivalence():
    pairs = [(s, 1000 + s) for s in range(8)]
    equal = sum(_modes_equal(p) for p in pairs)
    table = mode_contingency(QotParams(16, 3 / 8, 4), 300, seed=9)
    p = chi2_independence(table)
    _report(9, _exact("EPR vs prepare-and-measure", len(pairs), p, 0.01, equal == len(pairs) and p > 0.01,
                      f"exact n=3 equal for {equal}/{len(pairs)} seed pairs; χ² p at n=16 is the estimate"))


def _modes_equal(seeds):
    d = exact_mode_distributions(QotParams(3, 3 / 8, 1), *seeds)
    return d["prepare"] == d["epr"]


def test_10_layer_swap():
    cfg = preset("desk", mode="full")
    seeds = range(50)
    inputs = [_random_inputs(s, cfg.outer.ell) for s in seeds]
    real = [plain_ot(s0, s1, c, cfg.with_(seed=s)).value for s, (s0, s1, c) in zip(seeds, inputs)]
    assert all(v is not None for v in real)
    same = {}
    for layer in LAYERS:
        ideal = [plain_ot(s0, s1, c, cfg.with_(seed=s, ideal=(layer,))).value for s, (s0, s1, c) in zip(seeds, inputs)]
        same[layer] = sum(v is not None and np.array_equal(v, r) for v, r in zip(ideal, real))
    ok = all(n == 50 for n in same.values())
    _report(10, _exact("layer swap, 50 runs per layer", 50 * len(LAYERS), min(same.values()) / 50, 1.0, ok,
                       " ".join(f"{k}={v}/50" for k, v in same.items())))


def test_11_determinism(tmp_path):
    runs = [["--preset", "desk", "--mode", "full", "--seed", "11"],
            ["--preset", "desk", "--mode", "semi-real", "--seed", "12"],
            ["--preset", "test", "--mode", "hybrid", "--seed", "13"]]
    identical = 0
    for i, base in enumerate(runs):
        ell = preset(base[1]).outer.ell
        blobs = []
        for j in range(2):
            p = tmp_path / f"{i}-{j}.jsonl"
            assert run_cli(base + ["--secrets", f"{'a' * (ell // 4)},{'5' * (ell // 4)}", "--choice", "1",
                                   "--transcript-out", str(p)]) == EXIT_OK
            blobs.append(p.read_bytes())
        identical += blobs[0] == blobs[1]
    _report(11, _exact("byte-identical transcripts", len(runs), identical / len(runs), 1.0,
                       identical == len(runs), f"{identical}/{len(runs)} configurations"))
