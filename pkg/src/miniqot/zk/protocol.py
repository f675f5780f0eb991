"""Interactive three-view commit-and-open argument over a compiled statement.

Each round: the prover commits to the digests of the three simulated
parties' views together with their output shares (COMMIT), the verifier
sends a trit ``e`` (CHALLENGE), the prover opens views ``e`` and ``e+1``
(OPEN).  The verifier re-executes party ``e`` from its seed and party
``e+1``'s opened AND outputs and checks both commitments.  A false
statement survives one round with probability at most 2/3.

View digests are committed with a Naor string commitment over the fast PRG,
reusing the enclosing session's coin string ``rho`` when one is supplied.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from .. import bits as B
from ..prg import fast_expand
from ..transport.runtime import Oracle
from .engine import (SEED_BYTES, Statement, StatementError, prove_round, recompute_pair,
                     view_digest)

DIGEST_BITS = 256


class SimulationFailure(RuntimeError):
    pass


class Rewind(Exception):
    """Raised by a simulating prover whose guessed challenge was wrong."""

    def __init__(self, key, challenge: int):
        super().__init__(f"rewind at {key}")
        self.key = key
        self.challenge = challenge


def _digest_bits(d: bytes) -> np.ndarray:
    return np.unpackbits(np.frombuffer(d, dtype=np.uint8), bitorder="little")


def commit_digest(rho: np.ndarray, digest: bytes, r: np.ndarray) -> np.ndarray:
    bits = _digest_bits(digest)
    pad = fast_expand(r, rho.size * bits.size)
    return pad ^ (bits[:, None] & rho).reshape(-1)


def check_digest(rho, c, digest: bytes, r) -> bool:
    c = np.asarray(c, dtype=np.uint8).reshape(-1)
    expect = commit_digest(rho, digest, B.as_bits(r))
    return c.shape == expect.shape and bool(np.array_equal(c, expect))


def _round_messages(stmt: Statement, rho, lam: int, rng: np.random.Generator, seeds, x2, views, y,
                    digests=None):
    if digests is None:
        digests = [view_digest(p, seeds[p], x2 if p == 2 else None, views[p]) for p in range(3)]
    rs = [B.random_bits(rng, lam) for _ in range(3)]
    commits = np.stack([commit_digest(rho, d, r) for d, r in zip(digests, rs)])
    commit = {"c": commits, "y": np.asarray(y, dtype=np.uint8)}

    def opening(e: int):
        e1 = (e + 1) % 3
        need_x2 = 2 in (e, e1)
        return {"seeds": [seeds[e], seeds[e1]],
                "x2": np.asarray(x2, dtype=np.uint8) if need_x2 else np.zeros(0, np.uint8),
                "view": np.ascontiguousarray(views[e1], dtype=np.uint64),
                "r": np.stack([rs[e], rs[e1]])}

    return commit, opening


def check_round(stmt: Statement, rho, lam: int, commit: dict, e: int, opened: dict) -> bool:
    """Verifier's decision for one round; malformed input counts as reject."""
    try:
        c = np.asarray(commit["c"], dtype=np.uint8)
        y = np.asarray(commit["y"], dtype=np.uint8).reshape(-1)
        if c.shape != (3, 3 * lam * DIGEST_BITS) or y.shape != (3,) or int(y.max(initial=0)) > 1:
            return False
        if int(y[0] ^ y[1] ^ y[2]) != 1:
            return False
        e1 = (e + 1) % 3
        seed_e, seed_e1 = opened["seeds"]
        if len(seed_e) != SEED_BYTES or len(seed_e1) != SEED_BYTES:
            return False
        x2 = np.asarray(opened["x2"], dtype=np.uint8) if 2 in (e, e1) else None
        view_e1 = np.asarray(opened["view"], dtype=np.uint64).reshape(-1)
        r = np.asarray(opened["r"], dtype=np.uint8)
        if r.shape != (2, lam):
            return False
        view_e, y_e, y_e1 = recompute_pair(stmt, e, seed_e, seed_e1, x2, view_e1)
        if y_e != y[e] or y_e1 != y[e1]:
            return False
        d_e = view_digest(e, seed_e, x2 if e == 2 else None, view_e)
        d_e1 = view_digest(e1, seed_e1, x2 if e1 == 2 else None, view_e1)
        return check_digest(rho, c[e], d_e, r[0]) and check_digest(rho, c[e1], d_e1, r[1])
    except (StatementError, KeyError, TypeError, ValueError):
        return False


# -- parties ------------------------------------------------------------------

def _session_rho(ctx, rho, verifier: bool):
    if rho is not None:
        return B.as_bits(rho)
    if verifier:
        rho = B.random_bits(ctx.rng, 3 * ctx.lam)
        ctx.sess.send("RHO", rho)
        return rho
    rho = yield from ctx.sess.recv("RHO")
    rho = B.as_bits(rho)
    if rho.size != 3 * ctx.lam:
        ctx.abort("zk: malformed coin string")
    return rho


def zk_prove(ctx, stmt: Statement, witness, rho=None):
    """Prover party (generator).  ``rho=None`` lets the verifier pick the coins."""
    witness = np.asarray(witness, dtype=np.uint8).reshape(-1)
    if witness.size != stmt.n_witness:
        raise StatementError(f"witness must have {stmt.n_witness} bits, got {witness.size}")
    with ctx.sess.layer("zk"):
        if ctx.zk.backend == "ideal":
            ctx.sess.to_oracle("zk", "PROVE", {"statement": stmt.digest(), "witness": witness,
                                               "verifier": ctx.sess.peer}, aux=stmt)
            yield from ctx.sess.recv_oracle("DONE")
            return
        if rho is None:
            rho = yield from _session_rho(ctx, None, verifier=False)
        rho = B.as_bits(rho)
        for rnd in range(ctx.zk.rounds):
            flip = ctx.hook("zk.flip-party", None, round=rnd, statement=stmt)
            st = prove_round(stmt, witness, ctx.rng, flip_party=flip)
            commit, opening = _round_messages(stmt, rho, ctx.lam, ctx.rng, st.seeds, st.x2, st.views, st.y)
            ctx.sess.send("COMMIT", commit)
            e = yield from ctx.sess.recv("CHALLENGE")
            if not isinstance(e, int) or e not in (0, 1, 2):
                ctx.abort("zk: malformed challenge")
            ctx.sess.send("OPEN", opening(e))


def zk_verify(ctx, stmt: Statement, rho=None, abort_on_reject: bool = True):
    """Verifier party (generator); returns the accept bit.

    With ``abort_on_reject`` the verifier aborts at the first failed round;
    otherwise it runs all rounds and returns ``False``.
    """
    with ctx.sess.layer("zk"):
        if ctx.zk.backend == "ideal":
            res = yield from ctx.sess.recv_oracle("RESULT")
            ok = bool(res.get("accept")) and res.get("statement") == stmt.digest()
            if not ok and abort_on_reject:
                ctx.abort("zk: proof rejected")
            return ok
        rho = yield from _session_rho(ctx, rho, verifier=True)
        ok = True
        for rnd in range(ctx.zk.rounds):
            commit = yield from ctx.sess.recv("COMMIT")
            e = int(ctx.rng.integers(0, 3))
            e = ctx.hook("zk.challenge", e, round=rnd, commit=commit)
            ctx.sess.send("CHALLENGE", int(e))
            opened = yield from ctx.sess.recv("OPEN")
            if not check_round(stmt, rho, ctx.lam, commit, int(e), opened):
                ok = False
                if abort_on_reject:
                    ctx.abort(f"zk: proof rejected in round {rnd}")
        return ok


class IdealZk(Oracle):
    """Trusted proof check: tells the verifier whether the prover's witness satisfies the statement."""

    def handle(self, party, name, body, aux=None):
        if name == "SIMULATE":
            self.deliver(body["verifier"], "RESULT", {"statement": body["statement"], "accept": True})
            self.deliver(party, "DONE")
            return
        if name != "PROVE" or not isinstance(aux, Statement):
            return
        try:
            accept = aux.digest() == body["statement"] and aux.evaluate(body["witness"]) == 1
        except StatementError:
            accept = False
        self.deliver(body["verifier"], "RESULT", {"statement": body["statement"], "accept": bool(accept)})
        self.deliver(party, "DONE")


# -- simulation ---------------------------------------------------------------

def simulate_round(stmt: Statement, e: int, rho, lam: int, rng: np.random.Generator):
    """Commit/open messages for a round whose challenge will be ``e``, without a witness."""
    e1, e2 = (e + 1) % 3, (e + 2) % 3
    seeds = [rng.bytes(SEED_BYTES) for _ in range(3)]
    x2 = B.random_bits(rng, stmt.n_witness)
    T = max(stmt.tape_words, 1)
    views = np.zeros((3, T), dtype=np.uint64)
    views[e1] = rng.integers(0, np.iinfo(np.uint64).max, size=T, dtype=np.uint64, endpoint=True)
    views[e], y_e, y_e1 = recompute_pair(stmt, e, seeds[e], seeds[e1],
                                         x2 if 2 in (e, e1) else None, views[e1])
    y = np.zeros(3, dtype=np.uint8)
    y[e], y[e1], y[e2] = y_e, y_e1, 1 ^ y_e ^ y_e1
    digests = [None] * 3
    for p in (e, e1):
        digests[p] = view_digest(p, seeds[p], x2 if p == 2 else None, views[p])
    digests[e2] = rng.bytes(DIGEST_BITS // 8)
    commit, opening = _round_messages(stmt, rho, lam, rng, seeds, x2, views, y, digests)
    return commit, opening(e)


@dataclass
class SimRound:
    commit: dict
    challenge: int
    opening: dict
    tries: int


def zk_simulate(stmt: Statement, verifier_hook, rng: np.random.Generator, lam: int, rho,
                rounds: int, max_tries: int = 64) -> list[SimRound]:
    """Rewinding simulator against ``verifier_hook(round, commit) -> trit``.

    Each rewind re-invokes the hook on a fresh commitment; after
    ``max_tries`` refused guesses in one round :class:`SimulationFailure`.
    """
    rho = B.as_bits(rho)
    out = []
    for rnd in range(rounds):
        for tries in range(1, max_tries + 1):
            guess = int(rng.integers(0, 3))
            commit, opening = simulate_round(stmt, guess, rho, lam, rng)
            e = verifier_hook(rnd, commit)
            if e == guess:
                out.append(SimRound(commit, e, opening, tries))
                break
        else:
            raise SimulationFailure(f"round {rnd}: no matching challenge after {max_tries} tries")
    return out


@dataclass
class RewindPlan:
    """Guesses of a replay-rewinding simulator, keyed by (layer path, round)."""

    seed: int
    max_tries: int = 64
    guesses: dict = field(default_factory=dict)
    tries: dict = field(default_factory=dict)

    def guess(self, key) -> int:
        if key not in self.guesses:
            self.tries[key] = 1
            self.guesses[key] = self._draw(key)
        return self.guesses[key]

    def rng_for(self, key) -> np.random.Generator:
        return np.random.default_rng([self.seed, zlib.crc32(repr(key).encode()), self.tries.get(key, 1)])

    def _draw(self, key) -> int:
        return int(self.rng_for(key).integers(0, 3))

    def retry(self, key) -> None:
        self.tries[key] = self.tries.get(key, 1) + 1
        if self.tries[key] > self.max_tries:
            raise SimulationFailure(f"{key}: no matching challenge after {self.max_tries} tries")
        self.guesses[key] = self._draw(key)


def zk_sim_prove(ctx, stmt: Statement, plan: RewindPlan, rho=None):
    """Prover party that simulates each round and asks to be rewound on a wrong guess."""
    with ctx.sess.layer("zk"):
        if ctx.zk.backend == "ideal":
            # the ideal functionality is programmed directly by the simulator
            ctx.sess.to_oracle("zk", "SIMULATE", {"statement": stmt.digest(), "verifier": ctx.sess.peer})
            yield from ctx.sess.recv_oracle("DONE")
            return
        if rho is None:
            rho = yield from _session_rho(ctx, None, verifier=False)
        rho = B.as_bits(rho)
        for rnd in range(ctx.zk.rounds):
            key = (ctx.sess.path, rnd)
            guess = plan.guess(key)
            commit, opening = simulate_round(stmt, guess, rho, ctx.lam, plan.rng_for(key))
            ctx.sess.send("COMMIT", commit)
            e = yield from ctx.sess.recv("CHALLENGE")
            if e != guess:
                raise Rewind(key, e)
            ctx.sess.send("OPEN", opening)


def run_with_rewinding(run, plan: RewindPlan):
    """Call ``run(plan)`` until no simulated round needs rewinding."""
    while True:
        try:
            return run(plan)
        except Rewind as rw:
            plan.retry(rw.key)
