"""Command-line front end.

Without ``--role`` both parties run in one process.  With ``--role`` each of
sender, receiver and broker is its own process talking over TCP::

    python3 -m miniqot --role broker   --listen :9100
    python3 -m miniqot --role sender   --secrets 0badf00d,cafebabe --listen :9000 --broker :9100
    python3 -m miniqot --role receiver --choice 1 --connect :9000 --broker :9100

Exit codes: 0 success, 2 usage error, 3 protocol abort.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import bits as B
from .params import LAYERS, MODES, PRESETS, preset
from .transport.runtime import export_records

EXIT_OK, EXIT_USAGE, EXIT_ABORT = 0, 2, 3

log = logging.getLogger("miniqot")


class UsageError(ValueError):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="miniqot", description="Oblivious transfer from a simulated quantum channel.")
    p.add_argument("--role", choices=["sender", "receiver", "broker"],
                   help="run one party over TCP; omit to run everything in-process")
    p.add_argument("--mode", choices=MODES, default="full")
    p.add_argument("--preset", choices=sorted(PRESETS), default="desk")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--secrets", help="sender secrets as HEX0,HEX1 (ℓ bits each)")
    p.add_argument("--choice", type=int, choices=[0, 1], help="receiver choice bit")
    p.add_argument("--listen", help="HOST:PORT to accept the peer (sender) or the parties (broker)")
    p.add_argument("--connect", help="HOST:PORT of the sender (receiver only)")
    p.add_argument("--broker", help="HOST:PORT of the broker (sender and receiver over TCP)")
    p.add_argument("--ideal", action="append", default=[], choices=LAYERS,
                   help="replace one layer by its ideal functionality (repeatable)")
    p.add_argument("--transcript-out", help="write the frame transcript as JSON lines")
    p.add_argument("--timeout", type=float, default=300.0, help="socket timeout in seconds")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def parse_secrets(text: str | None, ell: int) -> tuple[np.ndarray, np.ndarray]:
    if not text:
        raise UsageError("--secrets is required")
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError("--secrets takes exactly two comma-separated hex strings")
    if ell % 4:
        raise UsageError(f"secret length {ell} is not a whole number of hex digits")
    out = []
    for h in parts:
        h = h.strip().lower().removeprefix("0x")
        if len(h) != ell // 4 or any(ch not in "0123456789abcdef" for ch in h):
            raise UsageError(f"each secret must be {ell // 4} hex digits, got {h!r}")
        if len(h) % 2:
            h = "0" + h
        out.append(B.from_hex(h, ell))
    return out[0], out[1]


def _config(args):
    if args.role is not None and "zk" in args.ideal:
        raise UsageError("the ideal ZK functionality is not available over TCP")
    return preset(args.preset, mode=args.mode, seed=args.seed, ideal=tuple(args.ideal),
                  transport="tcp" if args.role else "inproc")


def _hex(bits) -> str:
    return B.to_hex(bits)


def _run_local(args, cfg) -> int:
    from .stack import plain_ot, run_meta
    if args.choice is None:
        raise UsageError("--choice is required")
    s0, s1 = parse_secrets(args.secrets, cfg.outer.ell)
    out = plain_ot(s0, s1, args.choice, cfg)
    if args.transcript_out:
        export_records(out.records, args.transcript_out, run_meta(cfg, s0, s1, args.choice))
    if out.aborted:
        a = out.aborts[0]
        print(f"abort in {a.layer}: {a.reason}", file=sys.stderr)
        return EXIT_ABORT
    print(_hex(out.value))
    return EXIT_OK


def _run_broker(args, cfg) -> int:
    from .qsim import Broker
    from .stack import ORACLES
    from .transport.tcp import BrokerServer, listen, parse_addr
    if not args.listen:
        raise UsageError("broker needs --listen")
    srv = listen(parse_addr(args.listen, "0.0.0.0"))
    _, _, bseed = cfg.rngs()
    BrokerServer(Broker(bseed), ORACLES, srv).serve()
    return EXIT_OK


def _run_party(args, cfg) -> int:
    from .stack import RECEIVER, SENDER, make_ctx, receiver_party, sender_party
    from .transport.runtime import ProtocolSession
    from .transport.tcp import BrokerClient, RemoteBroker, TcpLink, connect, listen, parse_addr, run_single
    if not args.broker:
        raise UsageError(f"{args.role} needs --broker")
    rs, rr, _ = cfg.rngs()
    if args.role == "sender":
        s0, s1 = parse_secrets(args.secrets, cfg.outer.ell)
        if not args.listen:
            raise UsageError("sender needs --listen")
        srv = listen(parse_addr(args.listen, "0.0.0.0"))
        bsock = connect(parse_addr(args.broker), args.timeout)
        peer, _ = srv.accept()
        peer.settimeout(args.timeout)
        srv.close()
        me, other, rng = SENDER, RECEIVER, rs
    else:
        if args.choice is None:
            raise UsageError("--choice is required")
        if not args.connect:
            raise UsageError("receiver needs --connect")
        bsock = connect(parse_addr(args.broker), args.timeout)
        peer = connect(parse_addr(args.connect), args.timeout)
        me, other, rng = RECEIVER, SENDER, rr
    client = BrokerClient(bsock, me)
    link = TcpLink(me, peer, client)
    ctx = make_ctx(cfg, ProtocolSession(me, other, link), rng, RemoteBroker(client))
    gen = sender_party(ctx, cfg, s0, s1) if me == SENDER else receiver_party(ctx, cfg, args.choice)
    value, abort = run_single(me, gen, link)
    if args.transcript_out:
        export_records(link.records, args.transcript_out, {"config": cfg.to_dict(), "role": me})
    peer.close()
    client.chan.close()
    if abort is not None:
        print(f"abort in {abort.layer}: {abort.reason}", file=sys.stderr)
        return EXIT_ABORT
    if me == RECEIVER:
        print(_hex(value))
    return EXIT_OK


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        cfg = _config(args)
        if args.role is None:
            return _run_local(args, cfg)
        if args.role == "broker":
            return _run_broker(args, cfg)
        return _run_party(args, cfg)
    except UsageError as exc:
        print(f"miniqot: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"miniqot: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli())
