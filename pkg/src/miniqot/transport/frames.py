"""Wire frames.

Layout: ``session_id`` (8 bytes) | ``seq`` (4 bytes LE) | ``kind`` (1 byte) |
payload length (4 bytes LE) | payload.  Over TCP each frame is additionally
prefixed with its 4-byte little-endian total length.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

CLASSICAL, QUBIT_REF, CONTROL = 0, 1, 2
KIND_NAMES = {CLASSICAL: "CLASSICAL", QUBIT_REF: "QUBIT_REF", CONTROL: "CONTROL"}
_HEADER = struct.Struct("<8sIBI")


class FrameError(ValueError):
    pass


def session_id(layer_path: str) -> bytes:
    return hashlib.blake2b(layer_path.encode(), digest_size=8).digest()


@dataclass(frozen=True)
class Frame:
    session_id: bytes
    seq: int
    kind: int
    payload: bytes

    def __post_init__(self):
        if len(self.session_id) != 8:
            raise FrameError("session id must be 8 bytes")
        if self.kind not in KIND_NAMES:
            raise FrameError(f"unknown frame kind {self.kind}")
        if not 0 <= self.seq < 1 << 32:
            raise FrameError("sequence number out of range")

    def encode(self) -> bytes:
        return _HEADER.pack(self.session_id, self.seq, self.kind, len(self.payload)) + self.payload

    @classmethod
    def decode(cls, data: bytes, offset: int = 0) -> tuple["Frame", int]:
        if len(data) - offset < _HEADER.size:
            raise FrameError("truncated frame header")
        sid, seq, kind, n = _HEADER.unpack_from(data, offset)
        start = offset + _HEADER.size
        if len(data) - start < n:
            raise FrameError("truncated frame payload")
        return cls(sid, seq, kind, bytes(data[start:start + n])), start + n


def wrap_tcp(frame: Frame) -> bytes:
    body = frame.encode()
    return struct.pack("<I", len(body)) + body


class StreamParser:
    """Incremental parser for length-prefixed frames on a byte stream."""

    def __init__(self):
        self._buf = bytearray()

    def feed(self, data: bytes) -> list[Frame]:
        self._buf += data
        frames = []
        while len(self._buf) >= 4:
            (n,) = struct.unpack_from("<I", self._buf, 0)
            if len(self._buf) < 4 + n:
                break
            frame, end = Frame.decode(bytes(self._buf[4:4 + n]))
            if end != n:
                raise FrameError("length prefix disagrees with frame contents")
            frames.append(frame)
            del self._buf[:4 + n]
        return frames

    @property
    def pending(self) -> int:
        return len(self._buf)
