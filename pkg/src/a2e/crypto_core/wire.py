"""Length-prefixed composite encoding shared by every message and record.

A composite is the concatenation of ``len(part)`` as a 4-byte big-endian
integer followed by ``part``, for each part in order.
"""

import struct

from ..errors import MalformedInput

_LEN = struct.Struct(">I")


def pack(parts):
    out = bytearray()
    for part in parts:
        part = bytes(part)
        out += _LEN.pack(len(part))
        out += part
    return bytes(out)


def unpack(data, count=None):
    """Split a composite back into its parts.

    Raises MalformedInput on truncation, trailing bytes, or a part count
    different from ``count`` (when given).
    """
    data = memoryview(bytes(data))
    parts = []
    pos = 0
    while pos < len(data):
        if pos + 4 > len(data):
            raise MalformedInput("truncated length prefix")
        (n,) = _LEN.unpack_from(data, pos)
        pos += 4
        if pos + n > len(data):
            raise MalformedInput("truncated part")
        parts.append(bytes(data[pos:pos + n]))
        pos += n
    if count is not None and len(parts) != count:
        raise MalformedInput(f"expected {count} parts, got {len(parts)}")
    return parts


def pack_int(value, size=4):
    return value.to_bytes(size, "big")


def unpack_int(data, size=4):
    if len(data) != size:
        raise MalformedInput(f"integer field must be {size} bytes")
    return int.from_bytes(data, "big")


def pack_str(text):
    return text.encode("utf-8")


def unpack_str(data):
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedInput("invalid utf-8") from exc
