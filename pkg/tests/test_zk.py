from types import SimpleNamespace

import numpy as np
import pytest

from miniqot import bits as B
from miniqot.cds import CdsStatement, garble_instances
from miniqot.circuit import AND, CONST, BooleanCircuit
from miniqot.context import Ctx, ZkConfig
from miniqot.harness.adversary import ZkProtocol, honest, run_adversarial
from miniqot.harness.strategies import zk_cheating_prover
from miniqot.naor import commit_many, commit_string
from miniqot.transport.runtime import InProcessLink, ProtocolSession, run_parties
from miniqot.zk.engine import StatementError
from miniqot.zk.protocol import (IdealZk, RewindPlan, SimulationFailure, check_round, run_with_rewinding,
                                 zk_prove, zk_sim_prove, zk_simulate, zk_verify)
from miniqot.zk.statements import (circuit_statement, commits_open_to, compile_statement, ecom_consistency,
                                   socom_consistency)

AND_STMT = circuit_statement(BooleanCircuit(2, [AND], [0], [1], [2]))
UNSAT = circuit_statement(BooleanCircuit(2, [AND, CONST], [0, 0], [1, 0], [3]))


def _prove(stmt, witness, seed=0, rounds=6, lam=8, backend="real"):
    link = InProcessLink({"zk": IdealZk})
    rng = np.random.SeedSequence(seed).spawn(2)
    mk = lambda r, p, s: Ctx(ProtocolSession(r, p, link), np.random.default_rng(s), None, None,
                             ZkConfig(rounds, backend), lam)
    res = run_parties({"prover": zk_prove(mk("prover", "verifier", rng[0]), stmt, witness),
                       "verifier": zk_verify(mk("verifier", "prover", rng[1]), stmt)}, link)
    return res


def _random_statements(rng, lam=8):
    """One instance of every statement kind with an honest witness."""
    rho = B.random_bits(rng, 3 * lam)
    k, L = 4, 2
    msgs = rng.integers(0, 2, (k, L), dtype=np.uint8)
    seeds = rng.integers(0, 2, (k, lam), dtype=np.uint8)
    cs = commit_many(rho, msgs, seeds)
    out = [(AND_STMT, np.array([1, 1], np.uint8))]
    st = commits_open_to(lam, rho, cs, msgs)
    out.append((st, st.assemble({"r": seeds})))
    I = np.array([0, 2])
    st = socom_consistency(lam, rho, cs, I, msgs[I])
    out.append((st, st.assemble({"r": seeds, "hidden": msgs[[1, 3]]})))
    rho2 = B.random_bits(rng, 3 * lam)
    r_cds = B.random_bits(rng, lam)
    cstar_cds = commit_string(rho, msgs.reshape(-1), r_cds)
    cstar = commit_many(rho2, msgs, seeds)
    st = ecom_consistency(lam, rho, cstar_cds, rho2, cstar, L)
    out.append((st, st.assemble({"mu": msgs, "r_cds": r_cds, "r_star": seeds})))
    return out


def test_and_statement_accepts():
    res = _prove(AND_STMT, [1, 1])
    assert not res.aborted and res.outputs["verifier"] is True


def test_wrong_witness_length_rejected():
    with pytest.raises(StatementError):
        list(_prove(AND_STMT, [1, 1, 0]).outputs)


def test_unknown_statement_kind():
    with pytest.raises(StatementError):
        compile_statement("hamiltonicity")


@pytest.mark.parametrize("seed", range(3))
def test_completeness_all_kinds(seed):
    rng = np.random.default_rng(seed)
    for stmt, w in _random_statements(rng):
        assert stmt.evaluate(w) == 1
        res = _prove(stmt, w, seed=seed, rounds=4)
        assert not res.aborted, stmt.kind


def test_compile_commit_opens_to_matches_naor(rng):
    lam = 8
    rho, r = B.random_bits(rng, 3 * lam), B.random_bits(rng, lam)
    m = np.array([1], np.uint8)
    c = commit_string(rho, m, r)
    st = compile_statement("commit-opens-to", lam, rho, c, m)
    for _ in range(20):
        r2 = B.random_bits(rng, lam)
        assert st.evaluate(st.assemble({"r": r2[None]})) == int(np.array_equal(commit_string(rho, m, r2), c))
    assert st.evaluate(st.assemble({"r": r[None]})) == 1


def test_cds_consistency_honest_witness_20_instances():
    lam = 8
    for seed in range(20):
        rng = np.random.default_rng(seed)
        rho = B.random_bits(rng, 3 * lam)
        x = CdsStatement(rho, commit_string(rho, [1], B.random_bits(rng, lam)), 1)
        batch = garble_instances(SimpleNamespace(rng=rng, lam=lam), x, B.random_bits(rng, 2), rho)
        w = batch.witness()
        assert batch.statement.evaluate(w) == 1
        bad = w.copy()
        bad[int(rng.integers(0, lam))] ^= 1  # one garbling seed bit
        assert batch.statement.evaluate(bad) == 0


def test_cheating_prover_bound():
    N = 600
    h = run_adversarial(ZkProtocol(UNSAT, np.array([1, 1], np.uint8), rounds=10), zk_cheating_prover(), N, seed=3)
    accept = h.rate(lambda o: o.data["accepted"])
    assert accept <= (2 / 3) ** 10 + 0.05


def test_soundness_decays_like_two_thirds_power():
    ts, rates = (1, 5, 10), []
    for t in ts:
        h = run_adversarial(ZkProtocol(UNSAT, np.array([1, 1], np.uint8), rounds=t), zk_cheating_prover(),
                            2000, seed=10 + t)
        rates.append(h.rate(lambda o: o.data["accepted"]))
    slope = np.polyfit(ts, np.log(rates), 1)[0]
    assert abs(slope / np.log(2 / 3) - 1) <= 0.15


def test_honest_prover_control():
    h = run_adversarial(ZkProtocol(AND_STMT, np.array([1, 1], np.uint8), rounds=5), honest("zk", "prover"),
                        100, seed=0)
    assert h["success"] == 100


def test_simulator_against_honest_verifier(rng):
    lam = 8
    rho = B.random_bits(rng, 3 * lam)
    tries = []
    for _ in range(30):
        rounds = zk_simulate(AND_STMT, lambda rnd, commit: int(rng.integers(0, 3)), rng, lam, rho, rounds=10)
        for r in rounds:
            assert check_round(AND_STMT, rho, lam, r.commit, r.challenge, r.opening)
            tries.append(r.tries)
    # geometric with success probability 1/3: mean 3
    assert np.mean(tries) <= 3 + 3 * np.sqrt(6 / len(tries))


def test_simulator_failure_when_hook_refuses(rng):
    lam = 8
    rho = B.random_bits(rng, 3 * lam)
    with pytest.raises(SimulationFailure):
        zk_simulate(AND_STMT, lambda rnd, commit: 3, rng, lam, rho, rounds=1, max_tries=8)


def _profile(records):
    """COMMIT sizes and OPEN size per challenge value (x2 is sent only for some challenges)."""
    from miniqot.transport import codec
    commits, opens, e = set(), {}, None
    for r in records:
        if r["msg"] == "COMMIT":
            commits.add(r["size"])
        elif r["msg"] == "CHALLENGE":
            e = codec.decode(r["payload"])[1]
        elif r["msg"] == "OPEN":
            opens.setdefault(e, set()).add(r["size"])
    return commits, opens


@pytest.mark.parametrize("stmt", [AND_STMT, UNSAT], ids=["true", "false"])
def test_simulated_transcript_profile_matches_real(stmt):
    lam, rounds = 8, 12
    real = _prove(AND_STMT if stmt is AND_STMT else UNSAT, [1, 1], rounds=rounds)

    def run(plan):
        link = InProcessLink()
        ss = np.random.SeedSequence(9).spawn(2)
        mk = lambda r, p, s: Ctx(ProtocolSession(r, p, link), np.random.default_rng(s), None, None,
                                 ZkConfig(rounds, "real"), lam)
        return run_parties({"prover": zk_sim_prove(mk("prover", "verifier", ss[0]), stmt, plan),
                            "verifier": zk_verify(mk("verifier", "prover", ss[1]), stmt)}, link)

    plan = RewindPlan(4)
    sim = run_with_rewinding(run, plan)
    assert not sim.aborted and sim.outputs["verifier"] is True
    sc, so = _profile(sim.records)
    rc, ro = _profile(real.records)
    assert sc == rc and len(sc) == 1
    for e in set(so) & set(ro):
        assert so[e] == ro[e]
    assert all(1 <= t <= 64 for t in plan.tries.values())
