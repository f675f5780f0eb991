"""Prepare-and-measure versus EPR-mode BBCS: exact and sampled comparisons.

In EPR mode the sender keeps one half of each pair and measures it only
after the receiver has committed, which the receiver cannot tell apart
from receiving prepared BB84 states.  Both comparisons below run the real
protocol with an honest receiver and record, per execution, the sender's
final ``x^A`` together with everything the receiver saw and produced.

* :func:`exact_mode_distributions` fixes the party seeds (hence ``θ^A``,
  ``θ^B``, ``T``, ``f`` and the choice) and enumerates every remaining
  random bit: ``x^A`` and the broker coins in prepare-and-measure mode, the
  two per-pair broker coins in EPR mode.  Each assignment has the same
  weight, so equal distributions means equal multisets of records.
* :func:`mode_contingency` draws independent seeds and tabulates per
  position ``(θ^A = θ^B, x^A, x^B)`` for a χ² homogeneity test.
"""

from __future__ import annotations

import itertools
from collections import Counter

import numpy as np

from .. import bits as B
from ..bbcs import QotParams, qot_receive, qot_send
from ..context import Ctx, ZkConfig
from ..qsim import Broker
from ..transport import codec
from ..transport.runtime import InProcessLink, ProtocolSession, run_parties
from .adversary import ORACLES, AdversaryStrategy

MODES = ("prepare", "epr")


def _run(params: QotParams, epr: bool, sender_seed: int, receiver_seed: int, broker: Broker,
         x_override: np.ndarray | None = None) -> tuple:
    box: dict = {}

    def prepare(value, ctx, **info):
        return value if x_override is None else x_override.reshape(value.shape)

    def transfer(value, ctx, x_a, theta_a, **info):
        box["x_a"], box["theta_a"] = x_a.reshape(-1).copy(), theta_a.reshape(-1).copy()
        return value

    def commit(value, ctx, **info):
        box["theta_b"] = np.asarray(value[0], dtype=np.uint8).copy()
        box["x_b"] = np.asarray(value[1], dtype=np.uint8).copy()
        return value

    observer_s = AdversaryStrategy("observer", "bbcs", "sender",
                                   {"bbcs.prepare": prepare, "bbcs.transfer": transfer})
    observer_r = AdversaryStrategy("observer", "bbcs", "receiver", {"bbcs.commit-bases": commit})
    link = InProcessLink(ORACLES)
    mk = lambda role, peer, seed, adv: Ctx(ProtocolSession(role, peer, link), np.random.default_rng(seed),
                                           broker, adv, ZkConfig(6, "ideal"), 8)
    sender = mk("sender", "receiver", sender_seed, observer_s)
    receiver = mk("receiver", "sender", receiver_seed, observer_r)
    rng = np.random.default_rng([sender_seed, receiver_seed])
    s = B.random_bits(rng, 2 * params.ell).reshape(2, -1)
    c = int(rng.integers(0, 2))
    res = run_parties({"sender": qot_send(sender, s[0], s[1], params, "ideal", epr),
                       "receiver": qot_receive(receiver, c, params, "ideal")}, link)
    if res.aborted:
        raise RuntimeError(f"honest BBCS run aborted: {res.aborts}")
    out = res.outputs["receiver"]
    record = (B.to_hex(box["x_a"]), B.to_hex(box["x_b"]), _receiver_view(res.records), B.to_hex(out))
    return record, box


def _receiver_view(records: list[dict]) -> tuple:
    """Frames to and from the receiver.

    Qubit frames are reduced to their handle count: handle ids are broker
    bookkeeping whose numbering depends on how many slots a mode allocates.
    """
    view = []
    for r in records:
        if "receiver" not in r["direction"].split("->"):
            continue
        body = len(codec.decode(r["payload"])[1]) if r["kind"] == "QUBIT_REF" else r["payload"]
        view.append((r["layer"], r["direction"], r["msg"], body))
    return tuple(view)


def _table_coins(table: np.ndarray):
    def coins(slots, draws):
        return table[np.asarray(slots) % table.shape[0], np.asarray(draws)]
    return coins


def exact_mode_distributions(params: QotParams, sender_seed: int, receiver_seed: int
                             ) -> dict[str, Counter]:
    """Records of every equally likely execution, per mode (small ``n`` only)."""
    n = params.n
    if n > 6:
        raise ValueError("exact enumeration is limited to n <= 6")
    out = {m: Counter() for m in MODES}
    for bits in itertools.product((0, 1), repeat=2 * n):
        bits = np.array(bits, dtype=np.uint8)
        # prepare mode: x^A and one coin per qubit (draw 0)
        table = np.zeros((n, 3), dtype=np.uint8)
        table[:, 0] = bits[n:]
        out["prepare"][_run(params, False, sender_seed, receiver_seed, Broker(0, _table_coins(table)),
                            x_override=bits[:n])[0]] += 1
        # EPR mode: the first and second measurement coin of each pair (draws 1, 2)
        table = np.zeros((n, 3), dtype=np.uint8)
        table[:, 1], table[:, 2] = bits[:n], bits[n:]
        out["epr"][_run(params, True, sender_seed, receiver_seed, Broker(0, _table_coins(table)))[0]] += 1
    return out


def mode_contingency(params: QotParams, N: int, seed: int = 0) -> np.ndarray:
    """``2 × 8`` counts of ``(θ^A = θ^B, x^A, x^B)`` over all positions of ``N`` runs per mode."""
    table = np.zeros((2, 8), dtype=np.int64)
    seeds = np.random.SeedSequence(seed).generate_state(3 * N).reshape(N, 3)
    for row, epr in enumerate((False, True)):
        for s_seed, r_seed, b_seed in seeds:
            _, box = _run(params, epr, int(s_seed), int(r_seed), Broker(int(b_seed)))
            cell = 4 * (box["theta_a"] == box["theta_b"]) + 2 * box["x_a"] + box["x_b"]
            table[row] += np.bincount(cell, minlength=8)
    return table

