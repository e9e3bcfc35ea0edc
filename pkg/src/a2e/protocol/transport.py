"""Deterministic in-memory transport with byte accounting.

Envelope layout: [1-byte phase][2-byte sender: kind (2 bits) | index (14 bits)]
[4-byte body length][body].  Every delivered envelope is appended to the
log, which is the only source of the communication numbers.
"""

import hashlib
import json
import struct
from dataclasses import dataclass, asdict
from enum import IntEnum

from ..errors import MalformedInput


class Phase(IntEnum):
    KEYDIST = 1
    ISSUE = 2
    AUTH = 3
    TRACE = 4
    UPDATE = 5


class Kind(IntEnum):
    SP = 0
    RSU = 1
    DT = 2
    USER = 3


HEADER = struct.Struct(">BHI")
HEADER_SIZE = HEADER.size
MAX_INDEX = (1 << 14) - 1


def encode_envelope(phase: Phase, kind: Kind, index: int, body: bytes) -> bytes:
    if not 0 <= index <= MAX_INDEX:
        raise ValueError("sender index does not fit in 14 bits")
    return HEADER.pack(int(phase), (int(kind) << 14) | index, len(body)) + body


def decode_envelope(data: bytes):
    """-> (phase, kind, index, body)"""
    if len(data) < HEADER_SIZE:
        raise MalformedInput("envelope shorter than its header")
    phase, sender, length = HEADER.unpack_from(data)
    if len(data) != HEADER_SIZE + length:
        raise MalformedInput("envelope length field mismatch")
    try:
        return Phase(phase), Kind(sender >> 14), sender & MAX_INDEX, bytes(data[HEADER_SIZE:])
    except ValueError as exc:
        raise MalformedInput("unknown phase tag") from exc


@dataclass(frozen=True)
class LogEntry:
    phase: str
    src: str
    dst: str
    bytes: int
    time: float
    digest: str

    def to_json(self):
        d = asdict(self)
        d["from"] = d.pop("src")
        d["to"] = d.pop("dst")
        return json.dumps(d, sort_keys=True)


class Transport:
    def __init__(self, clock):
        self._clock = clock
        self._log = []
        # fault injection: tamper(entry, envelope) -> envelope actually delivered
        self.tamper = None

    @property
    def log(self):
        return tuple(self._log)

    def send(self, phase, sender, receiver, body: bytes) -> bytes:
        """Wrap ``body`` in an envelope from ``sender`` and record it."""
        env = encode_envelope(phase, sender.kind, sender.index, body)
        entry = LogEntry(phase.name.lower(), sender.id, receiver.id, len(env),
                         self._clock(), hashlib.sha256(env).hexdigest()[:16])
        self._log.append(entry)
        if self.tamper is not None:
            env = self.tamper(entry, env)
        return env

    def mark(self):
        return len(self._log)

    def since(self, mark):
        return self._log[mark:]

    def bytes_by_sender(self, mark=0):
        out = {}
        for e in self._log[mark:]:
            out[e.src] = out.get(e.src, 0) + e.bytes
        return out

    def transcript(self) -> str:
        """JSON lines, one per message."""
        return "".join(e.to_json() + "\n" for e in self._log)
