"""TCP transport: a peer link between the two parties plus a broker service.

Every message on a socket is a 4-byte little-endian length followed by the
payload.  Between the parties the payload is an encoded :class:`Frame`.
Between a party and the broker the payload is a codec-encoded list:

* ``["HELLO", party]`` once after connecting,
* ``["QSIM", method, args]`` answered by ``["OK", result]`` or ``["ERR", msg]``,
* ``["ORACLE", path, kind, name, body]`` (no answer),
* ``["DELIVER", path, name, body]`` pushed by the broker at any time.

The broker hosts the qubit simulator and the ideal functionalities, so the
hybrid modes also work across processes.  Functionalities that need
out-of-band data (the ideal ZK check) are not available over TCP.
"""

from __future__ import annotations

import logging
import selectors
import socket
import struct
from collections import deque

import numpy as np

from . import codec
from .frames import CLASSICAL, CONTROL, KIND_NAMES, Frame, session_id
from .runtime import ORACLE, PeerAbort, ProtocolAbort, ProtocolError, Recv

log = logging.getLogger(__name__)

QSIM_METHODS = ("prepare_batch", "epr_batch", "transmit_batch", "measure_batch", "measure_biased",
                "live_count")


class TransportError(ConnectionError):
    pass


def parse_addr(text: str, default_host: str = "127.0.0.1") -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"address must look like HOST:PORT or :PORT, got {text!r}")
    return host or default_host, int(port)


class Channel:
    """Length-prefixed messages over a connected socket."""

    def __init__(self, sock: socket.socket):
        self.sock = sock
        self._buf = bytearray()

    def send(self, payload: bytes) -> None:
        self.sock.sendall(struct.pack("<I", len(payload)) + payload)

    def _fill(self, n: int) -> None:
        while len(self._buf) < n:
            chunk = self.sock.recv(max(65536, n - len(self._buf)))
            if not chunk:
                raise TransportError("connection closed")
            self._buf += chunk

    def recv(self) -> bytes:
        self._fill(4)
        (n,) = struct.unpack_from("<I", self._buf, 0)
        self._fill(4 + n)
        payload = bytes(self._buf[4:4 + n])
        del self._buf[:4 + n]
        return payload

    def buffered(self) -> bool:
        """Whether a complete message is already buffered (select() will not report it)."""
        return len(self._buf) >= 4 and len(self._buf) >= 4 + struct.unpack_from("<I", self._buf, 0)[0]

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass


def listen(addr: tuple[str, int]) -> socket.socket:
    srv = socket.create_server(addr, reuse_port=False)
    return srv


def connect(addr: tuple[str, int], timeout: float = 60.0, retry_for: float = 10.0) -> socket.socket:
    import time
    deadline = time.monotonic() + retry_for
    while True:
        try:
            s = socket.create_connection(addr, timeout=timeout)
            s.settimeout(timeout)
            return s
        except OSError:
            if time.monotonic() > deadline:
                raise
            time.sleep(0.05)


# -- broker side --------------------------------------------------------------

class _Conn:
    def __init__(self, sock):
        self.chan = Channel(sock)
        self.party: str | None = None


class BrokerServer:
    """Serves one session: two parties, one qubit simulator, lazily created oracles."""

    def __init__(self, broker, oracle_factories: dict, sock: socket.socket):
        self.broker = broker
        self.factories = oracle_factories
        self.srv = sock
        self.conns: dict[str, _Conn] = {}
        self.oracles: dict[str, object] = {}
        self.records: list[dict] = []

    # the oracle API expects a link with deliver_oracle
    def deliver_oracle(self, dst, path, name, body):
        conn = self.conns.get(dst)
        if conn is None:
            raise ProtocolError(path, f"functionality output for unknown party {dst}")
        conn.chan.send(codec.encode(["DELIVER", path, name, body]))

    def _handle(self, conn: _Conn, msg) -> None:
        tag = msg[0]
        if tag == "HELLO":
            conn.party = msg[1]
            self.conns[conn.party] = conn
        elif tag == "QSIM":
            method, args = msg[1], msg[2]
            if method not in QSIM_METHODS:
                conn.chan.send(codec.encode(["ERR", f"method {method} not served"]))
                return
            try:
                out = getattr(self.broker, method)(conn.party, *args)
            except Exception as exc:  # noqa: BLE001 - reported to the caller
                conn.chan.send(codec.encode(["ERR", f"{type(exc).__name__}: {exc}"]))
                return
            if isinstance(out, tuple):
                out = list(out)
            conn.chan.send(codec.encode(["OK", out]))
        elif tag == "ORACLE":
            _, path, kind, name, body = msg
            oracle = self.oracles.get(path)
            if oracle is None:
                factory = self.factories.get(kind)
                if factory is None:
                    log.warning("no functionality for %s at %s", kind, path)
                    return
                oracle = self.oracles[path] = factory(path, self)
            oracle.handle(conn.party, name, body, None)

    def serve(self, n_parties: int = 2) -> None:
        sel = selectors.DefaultSelector()
        for _ in range(n_parties):
            s, _ = self.srv.accept()
            conn = _Conn(s)
            hello = codec.decode(conn.chan.recv())
            if hello[0] != "HELLO":
                raise TransportError("client did not introduce itself")
            self._handle(conn, hello)
            sel.register(s, selectors.EVENT_READ, conn)
            self._drain(conn)
        open_conns = n_parties
        while open_conns:
            for key, _ in sel.select():
                conn: _Conn = key.data
                try:
                    msg = codec.decode(conn.chan.recv())
                except (TransportError, OSError):
                    sel.unregister(key.fileobj)
                    conn.chan.close()
                    open_conns -= 1
                    continue
                self._handle(conn, msg)
                self._drain(conn)
        self.srv.close()

    def _drain(self, conn: _Conn) -> None:
        while conn.chan.buffered():
            self._handle(conn, codec.decode(conn.chan.recv()))


# -- party side ---------------------------------------------------------------

class BrokerClient:
    """Connection from one party to the broker; also buffers oracle deliveries."""

    def __init__(self, sock: socket.socket, party: str):
        self.chan = Channel(sock)
        self.party = party
        self.pending: deque = deque()
        self.chan.send(codec.encode(["HELLO", party]))

    def _next(self):
        msg = codec.decode(self.chan.recv())
        if msg[0] == "DELIVER":
            self.pending.append((msg[1], msg[2], msg[3]))
            return None
        return msg

    def call(self, method: str, *args):
        self.chan.send(codec.encode(["QSIM", method, list(args)]))
        while True:
            msg = self._next()
            if msg is None:
                continue
            if msg[0] == "OK":
                return msg[1]
            from ..qsim import QsimError
            raise QsimError(msg[1])

    def oracle(self, path, kind, name, body) -> None:
        self.chan.send(codec.encode(["ORACLE", path, kind, name, body]))

    def take_delivery(self, path: str):
        while True:
            for i, item in enumerate(self.pending):
                if item[0] == path:
                    del self.pending[i]
                    return item[1], item[2]
            self._next()


class RemoteBroker:
    """Broker proxy with the same batch API as :class:`miniqot.qsim.Broker`."""

    def __init__(self, client: BrokerClient):
        self.client = client

    def _call(self, method, party, *args):
        if party != self.client.party:
            raise ProtocolError("", f"{self.client.party} cannot act for {party}")
        return self.client.call(method, *[np.asarray(a) if isinstance(a, (list, np.ndarray)) else a
                                          for a in args])

    def prepare_batch(self, party, xs, thetas):
        return np.asarray(self._call("prepare_batch", party, np.asarray(xs, np.uint8),
                                     np.asarray(thetas, np.uint8)), dtype=np.int64)

    def epr_batch(self, party, count):
        a, b = self._call("epr_batch", party, int(count))
        return np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)

    def transmit_batch(self, party, handles, to):
        return np.asarray(self._call("transmit_batch", party, np.asarray(handles, np.int64), to),
                          dtype=np.int64)

    def measure_batch(self, party, handles, bases):
        return np.asarray(self._call("measure_batch", party, np.asarray(handles, np.int64),
                                     np.asarray(bases, np.uint8)), dtype=np.uint8)

    def measure_biased(self, party, handles, p_one):
        return np.asarray(self._call("measure_biased", party, np.asarray(handles, np.int64),
                                     np.asarray(p_one, np.float64)), dtype=np.uint8)


class TcpLink:
    """One party's link: frames to the peer over TCP, oracle traffic via the broker."""

    def __init__(self, party: str, peer_sock: socket.socket, broker: BrokerClient | None):
        self.party = party
        self.peer = Channel(peer_sock)
        self.broker = broker
        self.records: list[dict] = []
        self._send_seq: dict[str, int] = {}
        self._recv_seq: dict[str, int] = {}

    def _record(self, path, direction, kind, seq, name, payload):
        self.records.append({"layer": path, "direction": direction, "kind": KIND_NAMES.get(kind, kind),
                             "seq": seq, "msg": name, "payload": payload, "size": len(payload)})

    def send(self, src, dst, path, name, body, kind=CLASSICAL):
        seq = self._send_seq.get(path, 0)
        self._send_seq[path] = seq + 1
        frame = Frame(session_id(path), seq, kind, codec.encode([name, body]))
        self._record(path, f"{src}->{dst}", kind, seq, name, frame.payload)
        self.peer.send(frame.encode())

    def to_oracle(self, src, path, kind, name, body, aux=None):
        if self.broker is None:
            raise ProtocolError(path, "no broker connection for ideal functionalities", src)
        if aux is not None:
            raise ProtocolError(path, f"{kind} functionality is not available over TCP", src)
        self._record(path, f"{src}->{ORACLE}", CLASSICAL, -1, name, codec.encode([name, body]))
        self.broker.oracle(path, kind, name, body)

    def send_abort(self, src, dst, path, reason):
        try:
            self.send(src, dst, path, "ABORT", {"layer": path, "reason": reason}, CONTROL)
        except OSError:
            pass

    def take_blocking(self, party: str, req: Recv):
        if req.source == ORACLE:
            name, body = self.broker.take_delivery(req.path)
            self._record(req.path, f"{ORACLE}->{party}", CLASSICAL, -1, name, codec.encode([name, body]))
            if name != req.name:
                raise ProtocolError(req.path, f"expected {req.name}, functionality sent {name}", party)
            return body
        frame, _ = Frame.decode(self.peer.recv())
        name, body = codec.decode(frame.payload)
        if frame.kind == CONTROL and name == "ABORT":
            raise PeerAbort(body["layer"], f"peer aborted: {body['reason']}", party)
        path = req.path
        expect = self._recv_seq.get(path, 0)
        if frame.session_id != session_id(path) or name != req.name:
            raise ProtocolError(path, f"expected {req.name} at {path}, got {name}", party)
        if frame.seq != expect:
            raise ProtocolError(path, f"out-of-order frame (seq {frame.seq}, expected {expect})", party)
        self._recv_seq[path] = expect + 1
        self._record(path, f"{req.source}->{party}", frame.kind, frame.seq, name, frame.payload)
        return body


def run_single(party: str, gen, link: TcpLink):
    """Drive one party generator over a blocking link.

    Returns ``(output, abort)`` where ``abort`` is a :class:`ProtocolAbort` or ``None``.
    """
    try:
        req = next(gen)
        while True:
            try:
                value = link.take_blocking(party, req)
            except ProtocolAbort as exc:
                req = gen.throw(exc)
                continue
            req = gen.send(value)
    except StopIteration as stop:
        return stop.value, None
    except ProtocolAbort as exc:
        link.records.append({"layer": exc.layer, "direction": party, "kind": "ABORT", "seq": -1,
                             "msg": "ABORT", "payload": exc.reason.encode(), "size": 0})
        if not isinstance(exc, PeerAbort):
            link.send_abort(party, "peer", exc.layer, exc.reason)
        return None, exc
