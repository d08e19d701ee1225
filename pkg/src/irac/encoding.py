"""Canonical byte encoding for hashing, signing, and persistence.

Rules (bit-exact, platform independent):

* field element / scalar: 32 bytes, little-endian;
* byte string: 4-byte little-endian length, then the raw bytes;
* tuple or vector: 4-byte little-endian element count, then each element.

Decoding needs the schema the value was written with; the encoding is
injective among values of one schema. Schemas are ``FIELD``, ``BYTES``,
a tuple of schemas (fixed arity), or a one-element list ``[schema]`` for a
homogeneous vector.
"""

import struct

from .field import FIELD_BYTES

FIELD = "field"
BYTES = "bytes"


class EncodingError(ValueError):
    pass


def _u32(n: int) -> bytes:
    return struct.pack("<I", n)


def encode_field(x: int) -> bytes:
    if x < 0 or x >= 1 << (8 * FIELD_BYTES):
        raise EncodingError(f"integer out of 32-byte range: {x}")
    return x.to_bytes(FIELD_BYTES, "little")


def encode(value) -> bytes:
    if isinstance(value, bool):
        raise EncodingError("booleans have no canonical encoding")
    if isinstance(value, int):
        return encode_field(value)
    if isinstance(value, (bytes, bytearray)):
        return _u32(len(value)) + bytes(value)
    if isinstance(value, (tuple, list)):
        return _u32(len(value)) + b"".join(encode(v) for v in value)
    raise EncodingError(f"cannot encode {type(value).__name__}")


def decode(data: bytes, schema):
    value, rest = _decode(memoryview(bytes(data)), schema)
    if len(rest):
        raise EncodingError(f"{len(rest)} trailing bytes")
    return value


def _take(buf, n):
    if len(buf) < n:
        raise EncodingError("truncated input")
    return buf[:n], buf[n:]


def _decode(buf, schema):
    if schema == FIELD:
        raw, buf = _take(buf, FIELD_BYTES)
        return int.from_bytes(raw, "little"), buf
    if schema == BYTES:
        raw, buf = _take(buf, 4)
        (n,) = struct.unpack("<I", raw)
        raw, buf = _take(buf, n)
        return bytes(raw), buf
    raw, buf = _take(buf, 4)
    (count,) = struct.unpack("<I", raw)
    if isinstance(schema, tuple):
        if count != len(schema):
            raise EncodingError(f"expected {len(schema)} components, found {count}")
        out = []
        for sub in schema:
            v, buf = _decode(buf, sub)
            out.append(v)
        return tuple(out), buf
    if isinstance(schema, list) and len(schema) == 1:
        out = []
        for _ in range(count):
            v, buf = _decode(buf, schema[0])
            out.append(v)
        return out, buf
    raise EncodingError(f"unknown schema {schema!r}")
