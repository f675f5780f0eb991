"""Message-driven protocol sessions and the deterministic in-process scheduler.

Each party is a Python generator.  Receiving is ``body = yield from
sess.recv("NAME")``; sending never blocks.  Nested sub-protocols run inside
``with sess.layer("name"):`` blocks, which tag frames with a layer path such
as ``bbcs#1/ecom#1/zk#2``; both parties enter layers in the same order, so
the paths agree without negotiation.

Because every party only blocks on receives from fixed sources, the result
of a run does not depend on activation order; :func:`run_parties` still uses
a fixed round-robin order so transcripts are byte-identical across runs.
"""

from __future__ import annotations

import json
from collections import deque
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Callable, Generator

from . import codec
from .frames import CLASSICAL, CONTROL, KIND_NAMES, QUBIT_REF, Frame, session_id

ORACLE = "F"
EMPTY = object()


class ProtocolAbort(Exception):
    """A party stopped the protocol; ``layer`` is the path where it happened."""

    def __init__(self, layer: str, reason: str, party: str | None = None):
        super().__init__(f"{layer}: {reason}")
        self.layer = layer
        self.reason = reason
        self.party = party


class ProtocolError(ProtocolAbort):
    """Malformed, unexpected or out-of-order message."""


class PeerAbort(ProtocolAbort):
    """Raised inside a party when its peer aborted."""


class DeadlockError(RuntimeError):
    pass


class StrategyCrash(RuntimeError):
    """An adversary hook raised; harness counts this apart from protocol outcomes."""


@dataclass(frozen=True)
class Recv:
    source: str
    path: str
    name: str


@dataclass
class Aborted:
    layer: str
    reason: str
    party: str
    propagated: bool = False

    def __bool__(self):
        return False


class ProtocolSession:
    """One party's view of a run: layer stack, state tag and transcript."""

    def __init__(self, party: str, peer: str, link):
        self.party = party
        self.peer = peer
        self.link = link
        self.state = "init"
        self._stack: list[str] = []
        self._counters: dict[str, dict[str, int]] = {}

    @property
    def path(self) -> str:
        return "/".join(self._stack)

    @contextmanager
    def layer(self, name: str):
        parent = self.path
        counts = self._counters.setdefault(parent, {})
        counts[name] = counts.get(name, 0) + 1
        self._stack.append(f"{name}#{counts[name]}")
        try:
            yield self.path
        finally:
            self._stack.pop()

    @contextmanager
    def resume(self, path: str):
        """Re-enter a layer opened earlier with :meth:`layer` (reactive sub-protocols)."""
        parent, _, leaf = path.rpartition("/")
        if parent != self.path:
            raise ProtocolError(self.path, f"cannot resume {path} from {self.path or '<root>'}", self.party)
        self._stack.append(leaf)
        try:
            yield self.path
        finally:
            self._stack.pop()

    def send(self, name: str, body: Any = None, kind: int = CLASSICAL) -> None:
        self.link.send(self.party, self.peer, self.path, name, body, kind)

    def send_qubits(self, name: str, handles) -> None:
        self.send(name, handles, kind=QUBIT_REF)

    def recv(self, name: str, source: str | None = None) -> Generator[Recv, Any, Any]:
        body = yield Recv(source or self.peer, self.path, name)
        return body

    def recv_oracle(self, name: str):
        return (yield from self.recv(name, ORACLE))

    def to_oracle(self, kind: str, name: str, body: Any = None, aux: Any = None):
        """Send a query to the ideal functionality bound to the current layer.

        ``aux`` reaches the functionality without being framed or recorded
        (used to hand it objects such as compiled statements).
        """
        self.link.to_oracle(self.party, self.path, kind, name, body, aux)

    def abort(self, reason: str):
        raise ProtocolAbort(self.path, reason, self.party)

    def transcript(self) -> list[dict]:
        return [r for r in self.link.records if self.party in r["direction"].split("->")]


class Oracle:
    """Base class for in-process ideal functionalities."""

    def __init__(self, path: str, link):
        self.path = path
        self.link = link

    def deliver(self, party: str, name: str, body: Any = None) -> None:
        self.link.deliver_oracle(party, self.path, name, body)

    def handle(self, party: str, name: str, body: Any, aux: Any = None) -> None:  # pragma: no cover
        raise NotImplementedError


class InProcessLink:
    """Frame router, sequence checker and transcript recorder."""

    def __init__(self, oracle_factories: dict[str, Callable] | None = None,
                 drop: Callable[[dict], bool] | None = None):
        self.records: list[dict] = []
        self.inbox: dict[tuple[str, str], deque] = {}
        self._send_seq: dict[tuple[str, str], int] = {}
        self._recv_seq: dict[tuple[str, str], int] = {}
        self.oracle_factories = dict(oracle_factories or {})
        self.oracles: dict[str, Oracle] = {}
        self.drop = drop
        self.keep_payloads = True

    def _frame(self, src: str, dst: str, path: str, name: str, body, kind: int) -> Frame:
        direction = f"{src}->{dst}"
        key = (path, direction)
        seq = self._send_seq.get(key, 0)
        self._send_seq[key] = seq + 1
        frame = Frame(session_id(path), seq, kind, codec.encode([name, body]))
        rec = {"layer": path, "direction": direction, "kind": KIND_NAMES[kind],
               "seq": seq, "msg": name, "payload": frame.payload if self.keep_payloads else b"",
               "size": len(frame.payload)}
        self.records.append(rec)
        if self.drop is not None and self.drop(rec):
            return None
        return frame

    def send(self, src, dst, path, name, body, kind=CLASSICAL):
        frame = self._frame(src, dst, path, name, body, kind)
        if frame is not None:
            self.inbox.setdefault((dst, src), deque()).append((path, frame))

    def deliver_oracle(self, dst, path, name, body):
        self.send(ORACLE, dst, path, name, body)

    def to_oracle(self, src, path, kind, name, body, aux=None):
        self._frame(src, ORACLE, path, name, body, CLASSICAL)
        oracle = self.oracles.get(path)
        if oracle is None:
            factory = self.oracle_factories.get(kind)
            if factory is None:
                raise ProtocolError(path, f"no ideal functionality registered for {kind}", src)
            oracle = self.oracles[path] = factory(path, self)
        oracle.handle(src, name, body, aux)

    def send_abort(self, src, dst, path, reason):
        self.send(src, dst, path, "ABORT", {"layer": path, "reason": reason}, CONTROL)

    def take(self, party: str, req: Recv):
        """Pop the next frame body for ``req``; :data:`EMPTY` if nothing is queued."""
        q = self.inbox.get((party, req.source))
        if not q:
            return EMPTY
        if req.source == ORACLE:
            # each functionality instance is its own channel; match by layer path
            hit = next((i for i, (p, _) in enumerate(q) if p == req.path), None)
            if hit is None:
                return EMPTY
            q.rotate(-hit)
            path, frame = q.popleft()
            q.rotate(hit)
        else:
            path, frame = q.popleft()
        direction = f"{req.source}->{party}"
        name, body = codec.decode(frame.payload)
        if frame.kind == CONTROL and name == "ABORT":
            raise PeerAbort(body["layer"], f"peer aborted: {body['reason']}", party)
        key = (path, direction)
        expect = self._recv_seq.get(key, 0)
        if frame.seq != expect:
            raise ProtocolError(req.path, f"out-of-order frame (seq {frame.seq}, expected {expect})", party)
        self._recv_seq[key] = expect + 1
        if frame.session_id != session_id(req.path) or name != req.name:
            raise ProtocolError(req.path, f"expected {req.name} at {req.path}, got {name} at {path}", party)
        return body


@dataclass
class RunResult:
    outputs: dict[str, Any]
    records: list[dict]
    aborts: list[Aborted] = field(default_factory=list)

    @property
    def aborted(self) -> bool:
        return bool(self.aborts)


def run_parties(parties: dict[str, Generator], link: InProcessLink | None = None,
                order: list[str] | None = None) -> RunResult:
    """Drive party generators to completion with a fixed activation order."""
    link = link or InProcessLink()
    order = list(order or parties)
    gens = dict(parties)
    waiting: dict[str, Recv | None] = {p: None for p in gens}
    started: set[str] = set()
    outputs: dict[str, Any] = {}
    aborts: list[Aborted] = []

    def finish_abort(p, exc: ProtocolAbort):
        propagated = isinstance(exc, PeerAbort)
        info = Aborted(exc.layer, exc.reason, p, propagated)
        outputs[p] = info
        aborts.append(info)
        link.records.append({"layer": exc.layer, "direction": p, "kind": "ABORT", "seq": -1,
                             "msg": "ABORT", "payload": exc.reason.encode(), "size": 0})
        if not propagated:
            for q in gens:
                if q != p and q not in outputs:
                    link.send_abort(p, q, exc.layer, exc.reason)

    def pump(p, gen, req):
        moved = False
        while True:
            if not isinstance(req, Recv):
                raise TypeError(f"party {p} yielded {req!r}; only Recv requests are allowed")
            try:
                value = link.take(p, req)
            except ProtocolAbort as exc:
                req = gen.throw(exc)
                moved = True
                continue
            if value is EMPTY:
                return req, moved
            req = gen.send(value)
            moved = True

    while len(outputs) < len(gens):
        progressed = False
        for p in order:
            if p in outputs:
                continue
            gen = gens[p]
            try:
                if p not in started:
                    started.add(p)
                    req = next(gen)
                    progressed = True
                else:
                    req = waiting[p]
                req, moved = pump(p, gen, req)
                waiting[p] = req
                progressed = progressed or moved
            except StopIteration as stop:
                outputs[p] = stop.value
                progressed = True
            except ProtocolAbort as exc:
                finish_abort(p, exc)
                progressed = True
        if not progressed:
            blocked = {p: f"{r.name}@{r.path}" for p, r in waiting.items() if p not in outputs and r}
            raise DeadlockError(f"no party can make progress; waiting on {blocked}")
    return RunResult(outputs, link.records, aborts)


def export_records(records: list[dict], path, meta: dict | None = None) -> None:
    """Write JSON lines: optional META record, one line per frame, ABORT records."""
    with open(path, "w", encoding="utf-8") as fh:
        if meta is not None:
            fh.write(json.dumps({"layer": "", "direction": "", "kind": "META", "seq": -1,
                                 "payload_hex": codec.encode(meta).hex()}, sort_keys=True) + "\n")
        for r in records:
            line = {"layer": r["layer"], "direction": r["direction"], "kind": r["kind"],
                    "seq": r["seq"], "msg": r["msg"], "payload_hex": r["payload"].hex()}
            fh.write(json.dumps(line, sort_keys=True) + "\n")


def load_records(path) -> tuple[dict | None, list[dict]]:
    meta = None
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            r = json.loads(line)
            if r["kind"] == "META":
                meta = codec.decode(bytes.fromhex(r["payload_hex"]))
                continue
            r["payload"] = bytes.fromhex(r.pop("payload_hex"))
            records.append(r)
    return meta, records
