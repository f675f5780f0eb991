"""Deterministic tagged encoding for message bodies.

Supported values: None, bool, int, float, bytes, str, list/tuple, dict with str
keys (insertion order is kept, so callers build dicts in a fixed order) and
numpy arrays.  uint8 arrays holding only 0/1 are bit-packed.
"""

from __future__ import annotations

import struct

import numpy as np


class CodecError(ValueError):
    pass


def _u32(n: int) -> bytes:
    return struct.pack("<I", n)


def encode(value) -> bytes:
    out = bytearray()
    _enc(value, out)
    return bytes(out)


def _enc(v, out: bytearray) -> None:
    if v is None:
        out += b"N"
    elif v is True:
        out += b"T"
    elif v is False:
        out += b"F"
    elif isinstance(v, (int, np.integer)):
        v = int(v)
        raw = v.to_bytes((v.bit_length() + 8) // 8 or 1, "little", signed=True)
        out += b"I" + bytes([len(raw)]) + raw
    elif isinstance(v, (float, np.floating)):
        out += b"R" + struct.pack("<d", float(v))
    elif isinstance(v, (bytes, bytearray)):
        out += b"B" + _u32(len(v)) + bytes(v)
    elif isinstance(v, str):
        raw = v.encode("utf-8")
        out += b"S" + _u32(len(raw)) + raw
    elif isinstance(v, np.ndarray):
        _enc_array(v, out)
    elif isinstance(v, (list, tuple)):
        out += b"L" + _u32(len(v))
        for item in v:
            _enc(item, out)
    elif isinstance(v, dict):
        out += b"D" + _u32(len(v))
        for k, item in v.items():
            if not isinstance(k, str):
                raise CodecError("dict keys must be str")
            _enc(k, out)
            _enc(item, out)
    else:
        raise CodecError(f"cannot encode {type(v).__name__}")


def _enc_shape(shape, out: bytearray) -> None:
    out += bytes([len(shape)])
    for d in shape:
        out += _u32(d)


def _enc_array(a: np.ndarray, out: bytearray) -> None:
    if a.dtype == np.uint8 and (a.size == 0 or a.max() <= 1):
        out += b"b"
        _enc_shape(a.shape, out)
        out += np.packbits(a.reshape(-1), bitorder="little").tobytes()
        return
    dt = a.dtype.newbyteorder("<") if a.dtype.byteorder not in ("|", "<", "=") else a.dtype
    tag = dt.str.encode()
    out += b"A" + bytes([len(tag)]) + tag
    _enc_shape(a.shape, out)
    out += np.ascontiguousarray(a, dtype=dt).tobytes()


def decode(data: bytes):
    value, pos = _dec(memoryview(data), 0)
    if pos != len(data):
        raise CodecError("trailing bytes after value")
    return value


def _need(buf, pos, n):
    if pos + n > len(buf):
        raise CodecError("truncated value")


def _dec_shape(buf, pos):
    _need(buf, pos, 1)
    nd = buf[pos]
    pos += 1
    _need(buf, pos, 4 * nd)
    shape = struct.unpack_from("<" + "I" * nd, buf, pos)
    return shape, pos + 4 * nd


def _dec(buf, pos):
    _need(buf, pos, 1)
    tag = bytes(buf[pos:pos + 1])
    pos += 1
    if tag == b"N":
        return None, pos
    if tag == b"T":
        return True, pos
    if tag == b"F":
        return False, pos
    if tag == b"I":
        _need(buf, pos, 1)
        n = buf[pos]
        _need(buf, pos + 1, n)
        return int.from_bytes(bytes(buf[pos + 1:pos + 1 + n]), "little", signed=True), pos + 1 + n
    if tag == b"R":
        _need(buf, pos, 8)
        return struct.unpack_from("<d", buf, pos)[0], pos + 8
    if tag in (b"B", b"S"):
        _need(buf, pos, 4)
        (n,) = struct.unpack_from("<I", buf, pos)
        pos += 4
        _need(buf, pos, n)
        raw = bytes(buf[pos:pos + n])
        return (raw if tag == b"B" else raw.decode("utf-8")), pos + n
    if tag == b"L":
        _need(buf, pos, 4)
        (n,) = struct.unpack_from("<I", buf, pos)
        pos += 4
        items = []
        for _ in range(n):
            item, pos = _dec(buf, pos)
            items.append(item)
        return items, pos
    if tag == b"D":
        _need(buf, pos, 4)
        (n,) = struct.unpack_from("<I", buf, pos)
        pos += 4
        d = {}
        for _ in range(n):
            k, pos = _dec(buf, pos)
            d[k], pos = _dec(buf, pos)
        return d, pos
    if tag == b"b":
        shape, pos = _dec_shape(buf, pos)
        size = int(np.prod(shape, dtype=np.int64))
        nbytes = (size + 7) // 8
        _need(buf, pos, nbytes)
        raw = np.frombuffer(buf[pos:pos + nbytes], dtype=np.uint8)
        arr = np.unpackbits(raw, bitorder="little", count=size).reshape(shape)
        return arr, pos + nbytes
    if tag == b"A":
        _need(buf, pos, 1)
        n = buf[pos]
        dt = np.dtype(bytes(buf[pos + 1:pos + 1 + n]).decode())
        pos += 1 + n
        shape, pos = _dec_shape(buf, pos)
        nbytes = int(np.prod(shape, dtype=np.int64)) * dt.itemsize
        _need(buf, pos, nbytes)
        arr = np.frombuffer(buf[pos:pos + nbytes], dtype=dt).reshape(shape).copy()
        return arr, pos + nbytes
    raise CodecError(f"unknown tag {tag!r}")
