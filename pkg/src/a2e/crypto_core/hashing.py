"""Hash functions H1 (to scalars), H2 (to bit strings) and the PRG.

Every hash input starts with a one-byte context tag, and composite inputs
are length-prefixed through :func:`wire.pack`.  SHA-256 is the only
primitive underneath.
"""

import hashlib

import numpy as np

from .bls12_381 import R
from .wire import pack
from ..errors import MalformedInput

try:
    from . import _prg
except ImportError:  # pragma: no cover - exercised when the extension is absent
    _prg = None

# context tags
H1_X = 0x01
H1_TAR = 0x02
H1_ATTR = 0x03
H1_KEY = 0x04
H2_TAR = 0x11
H2_REQ = 0x12
H2_TRA = 0x13
PRG = 0x21

_WIDE = 64  # two SHA-256 blocks, so reduction mod R is statistically close to uniform


def _counter_blocks(tag, msg, nbytes):
    out = bytearray()
    ctr = 0
    while len(out) < nbytes:
        out += hashlib.sha256(bytes([tag, ctr]) + msg).digest()
        ctr += 1
    return bytes(out[:nbytes])


def hash_to_scalar(msg: bytes, tag: int = H1_X) -> int:
    """H1: bytes -> Z_R."""
    return int.from_bytes(_counter_blocks(tag, bytes(msg), _WIDE), "big") % R


def hash_parts_to_scalar(parts, tag: int = H1_X) -> int:
    return hash_to_scalar(pack(parts), tag)


def hash_to_bits(msg: bytes, nbits: int, tag: int = H2_TAR) -> bytes:
    """H2: bytes -> {0,1}^nbits, returned as ceil(nbits/8) bytes, high bits first.

    Unused trailing bits of the last byte are zero.
    """
    if nbits <= 0:
        raise ValueError("nbits must be positive")
    nbytes = (nbits + 7) // 8
    out = bytearray(_counter_blocks(tag, bytes(msg), nbytes))
    spare = nbytes * 8 - nbits
    if spare:
        out[-1] &= (0xFF << spare) & 0xFF
    return bytes(out)


def attr_to_scalar(attr: str) -> int:
    """Map a UTF-8 attribute string into Z_R."""
    return hash_to_scalar(attr.encode("utf-8"), H1_ATTR)


def _expand_py(seeds: bytes, seed_len: int, tag: int, out_len: int) -> bytes:
    """Reference implementation of the PRG batch (the C extension mirrors it)."""
    if seed_len <= 0 or len(seeds) % seed_len or out_len <= 0:
        raise ValueError("bad seed or output length")
    nblocks = (out_len + 31) // 32
    out = bytearray()
    t = bytes([tag])
    for off in range(0, len(seeds), seed_len):
        s = seeds[off:off + seed_len]
        block = b"".join(hashlib.sha256(t + s + bytes([c])).digest() for c in range(nblocks))
        out += block[:out_len]
    return bytes(out)


def _expand(seeds: bytes, seed_len: int, out_len: int) -> bytes:
    if _prg is not None:
        return _prg.expand(seeds, seed_len, PRG, out_len)
    return _expand_py(seeds, seed_len, PRG, out_len)


def prg_expand(seed: bytes, lam: int = 128) -> bytes:
    """P: {0,1}^lam -> {0,1}^(3 lam)."""
    if len(seed) * 8 != lam:
        raise MalformedInput(f"PRG seed must be {lam} bits, got {len(seed) * 8}")
    return _expand(bytes(seed), lam // 8, 3 * lam // 8)


def prg_expand_many(seeds: np.ndarray, lam: int = 128) -> np.ndarray:
    """Vectorized P over a uint8 array whose last axis is one seed.

    Returns an array of shape ``seeds.shape[:-1] + (3 lam / 8,)``.
    """
    seeds = np.ascontiguousarray(seeds, dtype=np.uint8)
    slen = lam // 8
    if seeds.shape[-1] != slen:
        raise MalformedInput(f"PRG seeds must be {lam} bits")
    olen = 3 * slen
    raw = _expand(seeds.tobytes(), slen, olen)
    return np.frombuffer(raw, dtype=np.uint8).reshape(seeds.shape[:-1] + (olen,))
