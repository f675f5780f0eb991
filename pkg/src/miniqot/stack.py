"""The full OT tower and its plumbing.

Layers, outermost first::

    outer BBCS OT  over  extractable commitment (ecom)
        ecom's CDS  over  parallel BBCS OT (inner)
            inner BBCS  over  Naor/ZK selective-opening commitment

Every layer can be replaced by its ideal functionality (see
:meth:`StackConfig.backends`).  Transcripts are lists of frame records.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bits as B
from .bbcs import FPot, ParallelOt, qot_receive, qot_send
from .context import Ctx, ZkConfig
from .params import StackConfig
from .qsim import Broker
from .socom import FSoCom
from .transport import codec
from .transport.runtime import (Aborted, InProcessLink, ProtocolSession, export_records, load_records,
                                run_parties)
from .zk.protocol import IdealZk

SENDER, RECEIVER = "sender", "receiver"
ORACLES = {"zk": IdealZk, "socom": FSoCom, "pot": FPot}


class StackAbort(RuntimeError):
    def __init__(self, info: Aborted):
        super().__init__(f"{info.layer}: {info.reason}")
        self.layer, self.reason = info.layer, info.reason


@dataclass
class OtOutcome:
    value: np.ndarray | None
    records: list[dict]
    aborts: list[Aborted]
    config: StackConfig

    @property
    def aborted(self) -> bool:
        return bool(self.aborts)

    def unwrap(self) -> np.ndarray:
        if self.aborts:
            raise StackAbort(self.aborts[0])
        return self.value


def make_ctx(config: StackConfig, sess: ProtocolSession, rng, broker, adversary=None) -> Ctx:
    b = config.backends()
    cds_ot = ParallelOt() if b["cds_ot"] == "ideal" else \
        ParallelOt("bbcs", config.inner, "ideal" if b["inner_socom"] == "ideal" else "plain")
    zk = ZkConfig(config.t, "ideal" if b["zk"] == "ideal" else "real")
    return Ctx(sess, rng, broker, adversary, zk, config.lam, cds_ot)


def _check_secret(s, ell: int) -> np.ndarray:
    s = B.as_bits(s)
    if s.size != ell:
        raise ValueError(f"secrets must have {ell} bits")
    return s


def sender_party(ctx: Ctx, config: StackConfig, s0, s1):
    backend = config.backends()["outer_socom"]
    return (yield from qot_send(ctx, _check_secret(s0, config.outer.ell),
                                _check_secret(s1, config.outer.ell), config.outer, backend))


def receiver_party(ctx: Ctx, config: StackConfig, c: int):
    if c not in (0, 1):
        raise ValueError("choice bit must be 0 or 1")
    backend = config.backends()["outer_socom"]
    return (yield from qot_receive(ctx, c, config.outer, backend))


def plain_ot(s0, s1, c: int, config: StackConfig, adversary: dict | None = None) -> OtOutcome:
    """Run the tower in-process; ``adversary`` maps a role to its strategy object."""
    adversary = adversary or {}
    link = InProcessLink(ORACLES)
    rs, rr, bseed = config.rngs()
    broker = Broker(bseed)
    cs = make_ctx(config, ProtocolSession(SENDER, RECEIVER, link), rs, broker, adversary.get(SENDER))
    cr = make_ctx(config, ProtocolSession(RECEIVER, SENDER, link), rr, broker, adversary.get(RECEIVER))
    res = run_parties({SENDER: sender_party(cs, config, s0, s1), RECEIVER: receiver_party(cr, config, c)},
                      link)
    value = None if res.aborted else np.asarray(res.outputs[RECEIVER], dtype=np.uint8)
    return OtOutcome(value, res.records, res.aborts, config)


# -- transcript checks --------------------------------------------------------

def _is_ancestor(a: str, b: str) -> bool:
    return b == a or b.startswith(a + "/")


def serialization_violations(records: list[dict]) -> list[tuple[str, str]]:
    """Pairs of unrelated sub-protocol paths whose frame ranges overlap.

    A sub-protocol may be resumed (reactive commitments), so an ancestor's
    frames may appear inside a descendant's range; only sibling branches
    must not interleave.
    """
    span: dict[str, list[int]] = {}
    for i, r in enumerate(records):
        if r.get("kind") == "ABORT" or not r.get("layer"):
            continue
        s = span.setdefault(r["layer"], [i, i])
        s[1] = i
    paths = sorted(span, key=lambda p: span[p][0])
    bad = []
    for i, p in enumerate(paths):
        for q in paths[i + 1:]:
            if span[q][0] > span[p][1]:
                break
            if not (_is_ancestor(p, q) or _is_ancestor(q, p)):
                bad.append((p, q))
    return bad


def export_transcript(outcome_or_records, path, meta: dict | None = None) -> None:
    records = getattr(outcome_or_records, "records", outcome_or_records)
    export_records(records, path, meta)


def run_meta(config: StackConfig, s0, s1, c) -> dict:
    return {"config": config.to_dict(), "s0": B.as_bits(s0), "s1": B.as_bits(s1), "c": int(c)}


def replay(path) -> bool:
    """Re-run the execution described by a transcript's META record and compare frames."""
    meta, records = load_records(path)
    if meta is None or "config" not in meta:
        raise ValueError("transcript has no run metadata")
    cfg = StackConfig.from_dict(meta["config"])
    again = plain_ot(meta["s0"], meta["s1"], meta["c"], cfg)
    if len(again.records) != len(records):
        return False
    return all(a["layer"] == b["layer"] and a["direction"] == b["direction"] and a["seq"] == b["seq"]
               and a["payload"] == b["payload"] for a, b in zip(again.records, records))


def frame_summary(records: list[dict]) -> list[tuple[str, str, str]]:
    """(layer, direction, message) triples, for structural diffs between modes."""
    return [(r["layer"], r["direction"], r.get("msg", "")) for r in records]


def decode_payload(record: dict):
    return codec.decode(record["payload"])
