"""Library of adversary strategies used by the tests and the acceptance suite."""

from __future__ import annotations

import numpy as np

from .. import bits as B
from ..naor import commit_many
from .adversary import AdversaryStrategy


def guess_committing_receiver() -> AdversaryStrategy:
    """BBCS receiver that commits to guessed outcomes instead of measuring.

    Each checked position with matching bases is wrong with probability 1/2,
    so a check set of size ``|T|`` passes with probability ``(3/4)^|T|``.
    """

    def measure(value, ctx, handles, bases):
        return bases, B.random_bits(ctx.rng, len(handles))

    return AdversaryStrategy("guess-committing-receiver", "bbcs", "receiver", {"bbcs.measure": measure})


def _corrupt_labels(secrets: np.ndarray, lam: int, instances, per_instance: int, rng,
                    wire: int | None = None, bit: int | None = None) -> np.ndarray:
    """Flip one coin bit of ``per_instance`` OT slots in each listed instance."""
    s = np.array(secrets, dtype=np.uint8).reshape(2 * lam, lam, 2, 2 * lam)
    for i in instances:
        wires = [wire] if wire is not None else rng.choice(lam, size=per_instance, replace=False)
        for j in wires:
            b = bit if bit is not None else int(rng.integers(0, 2))
            s[i, j, b, lam] ^= 1
    return s.reshape(secrets.shape)


def cds_bad_instances(n_bad: int, per_instance: int = 1) -> AdversaryStrategy:
    """CDS sender that spoils ``n_bad`` random instances.

    In each, ``per_instance`` (wire, bit) slots carry a coin that does not
    open the label commitment.  One slot per instance is the hardest case
    to catch: an opened instance reveals it only when the random choice
    string selects that bit.
    """

    def ot_inputs(value, ctx, **info):
        bad = ctx.rng.choice(2 * ctx.lam, size=n_bad, replace=False)
        return _corrupt_labels(value, ctx.lam, bad, per_instance, ctx.rng)

    return AdversaryStrategy(f"cds-{n_bad}-bad-instances", "cds", "sender", {"cds.ot-inputs": ot_inputs})


def cds_single_bad_label(instance: int = 0, wire: int = 0, bit: int = 1) -> AdversaryStrategy:
    """CDS sender that spoils exactly the label for ``w_wire = bit`` in one instance."""

    def ot_inputs(value, ctx, **info):
        return _corrupt_labels(value, ctx.lam, [instance], 1, ctx.rng, wire, bit)

    return AdversaryStrategy("cds-single-bad-label", "cds", "sender", {"cds.ot-inputs": ot_inputs})


def zk_cheating_prover(layer: str = "zk", corruption: str = "prover") -> AdversaryStrategy:
    """Prover that makes one random simulated party's output claim true.

    Two of the three challenges leave the inconsistent view unchecked, so a
    round of a false statement is accepted with probability 2/3.
    """

    def flip(value, ctx, **info):
        return int(ctx.rng.integers(0, 3))

    return AdversaryStrategy("zk-cheating-prover", layer, corruption, {"zk.flip-party": flip})


def _flip_one(arr: np.ndarray, rng) -> np.ndarray:
    arr = np.array(arr, dtype=np.uint8)
    if arr.size:
        arr.reshape(-1)[int(rng.integers(0, arr.size))] ^= 1
    return arr


def equivocating_committer(kind: str = "mixed", cheat_zk: bool = False) -> AdversaryStrategy:
    """Extractable-commitment committer that tries to open inconsistently.

    ``kind``:

    * ``reveal``: flips one revealed bit at opening time;
    * ``cstar``: ``c*`` commits to a different vector than the CDS secret;
    * ``cds-secret``: the CDS secret differs from the committed vector;
    * ``mixed``: one of the above per trial.

    ``cheat_zk`` also runs the cheating prover inside every proof.
    """
    kinds = ("reveal", "cstar", "cds-secret")
    if kind not in kinds + ("mixed",):
        raise ValueError(f"unknown equivocation {kind!r}")

    def pick(ctx):
        if not hasattr(ctx, "_equivocation"):
            ctx._equivocation = kind if kind != "mixed" else kinds[int(ctx.rng.integers(0, 3))]
        return ctx._equivocation

    def reveal(value, ctx, **info):
        return _flip_one(value, ctx.rng) if pick(ctx) == "reveal" else value

    def cstar(value, ctx, messages, rho_star, r_star, **info):
        if pick(ctx) != "cstar":
            return value
        return commit_many(rho_star, _flip_one(messages, ctx.rng), r_star)

    def cds_secret(value, ctx, **info):
        return _flip_one(value, ctx.rng) if pick(ctx) == "cds-secret" else value

    hooks = {"ecom.reveal": reveal, "ecom.cstar": cstar, "ecom.cds-secret": cds_secret}
    if cheat_zk:
        hooks.update(zk_cheating_prover().hooks)
    return AdversaryStrategy(f"equivocating-committer-{kind}", "ecom", "committer", hooks)
