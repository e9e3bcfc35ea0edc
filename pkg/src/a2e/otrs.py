"""One-time traceable ring signatures built from a PRG.

A key has L positions.  Position k holds two lambda-bit seeds
(sk0[k], sk1[k]) and publishes pk[k] = P(sk0[k]) ^ P(sk1[k]).  A signature
opens, for every ring member and every position, one seed plus one bit
``str``; the signer can only make the row XOR land on the hash ``tar``
because it knows both preimages for its own row.  Opening different seeds
at the same position in two signatures exposes P(sk0) ^ P(sk1), which is
exactly the public key, and that is what :func:`trace_match` looks for.

Arrays throughout: seeds are uint8 ``(..., lam/8)``, PRG outputs uint8
``(..., 3 lam/8)`` and bit strings uint8 0/1 vectors of length L.
"""

import hashlib
import random
from typing import Callable, Optional, Sequence

import numpy as np

from .crypto_core import wire
from .crypto_core.hashing import H2_TAR, hash_to_bits, prg_expand_many
from .errors import MalformedInput, Rejected, TraceError

MODE_KEYS = 0
MODE_IDS = 1


class OneTimePublicKey:
    __slots__ = ("arr", "data", "fingerprint")

    def __init__(self, arr: np.ndarray):
        arr = np.ascontiguousarray(arr, dtype=np.uint8)
        arr.setflags(write=False)
        self.arr = arr
        self.data = arr.tobytes()
        self.fingerprint = hashlib.sha256(self.data).digest()

    @property
    def L(self):
        return self.arr.shape[0]

    def to_bytes(self) -> bytes:
        return self.data

    @classmethod
    def from_bytes(cls, data, L, lam=128):
        row = 3 * lam // 8
        if len(data) != L * row:
            raise MalformedInput(f"one-time public key must be {L * row} bytes")
        return cls(np.frombuffer(bytes(data), dtype=np.uint8).reshape(L, row))

    def __eq__(self, other):
        return isinstance(other, OneTimePublicKey) and self.data == other.data

    def __hash__(self):
        return hash(self.fingerprint)

    def __repr__(self):
        return f"OneTimePublicKey({self.fingerprint.hex()[:12]})"


class OneTimeKeyPair:
    __slots__ = ("sk0", "sk1", "pk", "lam")

    def __init__(self, sk0, sk1, lam=128):
        self.sk0 = np.asarray(sk0, dtype=np.uint8)
        self.sk1 = np.asarray(sk1, dtype=np.uint8)
        if self.sk0.shape != self.sk1.shape or self.sk0.shape[-1] != lam // 8:
            raise MalformedInput("seed arrays must both be (L, lam/8)")
        self.lam = lam
        self.pk = OneTimePublicKey(prg_expand_many(self.sk0, lam) ^ prg_expand_many(self.sk1, lam))

    @property
    def L(self):
        return self.sk0.shape[0]


def gen_one_time_key(params=None, rng=None, *, L=None, lam=None) -> OneTimeKeyPair:
    """Fresh key with ``params.L`` positions (or explicit ``L``/``lam``; 256/128 without either)."""
    L = L or (params.L if params is not None else 256)
    lam = lam or (params.lam if params is not None else 128)
    rng = rng or random.SystemRandom()
    nbytes = L * lam // 8
    sk0 = np.frombuffer(rng.randbytes(nbytes), dtype=np.uint8).reshape(L, lam // 8)
    sk1 = np.frombuffer(rng.randbytes(nbytes), dtype=np.uint8).reshape(L, lam // 8)
    return OneTimeKeyPair(sk0, sk1, lam)


class RingSig:
    """``strs`` is (M, L) of 0/1, ``seeds`` is (M, L, lam/8).

    ``handles`` are the directory identifiers of the ring keys; when present
    the signature serializes in ids mode by default.
    """

    __slots__ = ("ring", "strs", "seeds", "msg", "handles", "lam", "_expanded", "_verdict")

    def __init__(self, ring, strs, seeds, msg, handles=None, lam=128):
        self.ring = tuple(ring)
        # private read-only copies, so cached expansions and verdicts stay valid
        self.strs = np.array(strs, dtype=np.uint8)
        self.seeds = np.array(seeds, dtype=np.uint8)
        self.strs.setflags(write=False)
        self.seeds.setflags(write=False)
        self.msg = bytes(msg)
        self.handles = None if handles is None else tuple(bytes(h) for h in handles)
        self.lam = lam
        self._expanded = None
        self._verdict = None

    @property
    def M(self):
        return len(self.ring)

    @property
    def L(self):
        return self.strs.shape[1]

    def expanded(self):
        """P(seed) for every opened seed, computed once."""
        if self._expanded is None:
            self._expanded = prg_expand_many(self.seeds, self.lam)
        return self._expanded

    def to_bytes(self, mode=None) -> bytes:
        if mode is None:
            mode = MODE_IDS if self.handles is not None else MODE_KEYS
        if mode == MODE_IDS:
            if self.handles is None:
                raise ValueError("ids mode needs key handles")
            ring_blob = wire.pack(self.handles)
        else:
            ring_blob = b"".join(pk.data for pk in self.ring)
        return wire.pack([
            bytes([mode]),
            wire.pack_int(self.M),
            wire.pack_int(self.L),
            ring_blob,
            np.packbits(self.strs, axis=1).tobytes(),
            np.ascontiguousarray(self.seeds).tobytes(),
            self.msg,
        ])

    @classmethod
    def from_bytes(cls, data, lam=128, resolve: Optional[Callable[[bytes], OneTimePublicKey]] = None):
        """Parse a signature; ids mode requires ``resolve(handle) -> pk``."""
        mode_b, m_b, l_b, ring_blob, str_blob, seed_blob, msg = wire.unpack(data, 7)
        if len(mode_b) != 1 or mode_b[0] not in (MODE_KEYS, MODE_IDS):
            raise MalformedInput("unknown ring mode")
        M, L = wire.unpack_int(m_b), wire.unpack_int(l_b)
        if M < 1 or L < 1 or L % 8:
            raise MalformedInput("bad ring dimensions")
        sb = lam // 8
        if len(str_blob) != M * L // 8 or len(seed_blob) != M * L * sb:
            raise MalformedInput("str or seed matrix has wrong size")
        strs = np.unpackbits(np.frombuffer(str_blob, dtype=np.uint8).reshape(M, L // 8), axis=1)
        seeds = np.frombuffer(seed_blob, dtype=np.uint8).reshape(M, L, sb)
        handles = None
        if mode_b[0] == MODE_IDS:
            handles = wire.unpack(ring_blob, M)
            if resolve is None:
                raise MalformedInput("ids-mode signature needs a key directory")
            try:
                ring = [resolve(h) for h in handles]
            except KeyError as exc:
                raise MalformedInput("unknown ring member") from exc
        else:
            row = L * 3 * sb
            if len(ring_blob) != M * row:
                raise MalformedInput("ring key block has wrong size")
            ring = [OneTimePublicKey.from_bytes(ring_blob[i * row:(i + 1) * row], L, lam)
                    for i in range(M)]
        return cls(ring, strs, seeds, msg, handles, lam)


def size_model_bits(M: int, L: int, lam: int = 128) -> int:
    """str bits plus opened seeds: M L (1 + lambda)."""
    return M * L * (1 + lam)


def _ring_matrix(ring: Sequence[OneTimePublicKey]) -> np.ndarray:
    return np.stack([pk.arr for pk in ring])


def _tar(ring, r, msg, L):
    digest_in = wire.pack([b"".join(pk.fingerprint for pk in ring), r.tobytes(), msg])
    return np.unpackbits(np.frombuffer(hash_to_bits(digest_in, L, H2_TAR), dtype=np.uint8))[:L]


def ring_sign(ring, msg: bytes, key: OneTimeKeyPair, self_index: int, rng=None, handles=None) -> RingSig:
    ring = tuple(ring)
    M, L, lam = len(ring), key.L, key.lam
    if M < 1:
        raise ValueError("ring must contain at least one key")
    if not 0 <= self_index < M:
        raise IndexError("self_index outside the ring")
    if ring[self_index] != key.pk:
        raise ValueError("ring[self_index] is not the signer's public key")
    if any(pk.L != L for pk in ring):
        raise ValueError("ring keys have different lengths")
    if handles is not None and len(handles) != M:
        raise ValueError("one handle per ring member")
    rng = rng or random.SystemRandom()
    sb = lam // 8
    others = [i for i in range(M) if i != self_index]

    # non-self rows, in ring order
    strs = np.zeros((M, L), dtype=np.uint8)
    seeds = np.zeros((M, L, sb), dtype=np.uint8)
    if others:
        n = len(others)
        strs[others] = np.unpackbits(
            np.frombuffer(rng.randbytes(n * L // 8), dtype=np.uint8)).reshape(n, L)
        seeds[others] = np.frombuffer(rng.randbytes(n * L * sb), dtype=np.uint8).reshape(n, L, sb)
    pk_mat = _ring_matrix(ring)
    # the self row is overwritten below
    r = prg_expand_many(seeds, lam) ^ (pk_mat * strs[:, :, None])
    r[self_index] = prg_expand_many(key.sk0, lam)

    tar = _tar(ring, r, msg, L)
    s = tar.copy()
    for i in others:
        s ^= strs[i]
    strs[self_index] = s
    seeds[self_index] = np.where(s[:, None].astype(bool), key.sk1, key.sk0)
    return RingSig(ring, strs, seeds, msg, handles, lam)


def _structure_problem(ring, sig):
    M = len(ring)
    if M < 1:
        return "empty ring"
    L = ring[0].L
    sb = sig.lam // 8
    if sig.strs.shape != (M, L) or sig.seeds.shape != (M, L, sb):
        return "matrix dimensions do not match the ring"
    if any(pk.arr.shape != (L, 3 * sb) for pk in ring):
        return "ring keys have inconsistent shapes"
    if sig.strs.max(initial=0) > 1:
        return "str entries must be bits"
    return None


def ring_verify(ring, msg: bytes, sig: RingSig):
    """True, or a falsy :class:`Rejected` explaining why not."""
    ring = tuple(ring)
    problem = _structure_problem(ring, sig)
    if problem:
        return Rejected(problem, malformed=True)
    if sig.msg != bytes(msg):
        return Rejected("signature carries a different message")
    r = sig.expanded() ^ (_ring_matrix(ring) * sig.strs[:, :, None])
    tar = _tar(ring, r, bytes(msg), sig.L)
    if not np.array_equal(np.bitwise_xor.reduce(sig.strs, axis=0), tar):
        return Rejected("row XOR does not equal tar")
    return True


def verify(sig: RingSig):
    """Verify against the ring and message the signature carries (memoized)."""
    if sig._verdict is None:
        sig._verdict = ring_verify(sig.ring, sig.msg, sig)
    return sig._verdict


def match_matrix(sig_a: RingSig, sig_b: RingSig) -> np.ndarray:
    """(M, L) boolean: P(seed_a) ^ P(seed_b) equals the ring key at (i, k)."""
    pk_mat = _ring_matrix(sig_a.ring)
    return np.all((sig_a.expanded() ^ sig_b.expanded()) == pk_mat, axis=-1)


def trace_match(sig_a: RingSig, sig_b: RingSig) -> Optional[int]:
    """Index of the ring member that produced both signatures, if any."""
    if len(sig_a.ring) != len(sig_b.ring) or any(
            a.fingerprint != b.fingerprint for a, b in zip(sig_a.ring, sig_b.ring)):
        raise TraceError("signatures are over different rings")
    for sig in (sig_a, sig_b):
        verdict = verify(sig)
        if not verdict:
            raise TraceError(f"input signature does not verify: {verdict.reason}")
    hits = np.flatnonzero(match_matrix(sig_a, sig_b).any(axis=1))
    if len(hits) == 0:
        return None
    if len(hits) > 1:
        raise TraceError(f"several ring members match: {hits.tolist()}")
    return int(hits[0])


def xor_count(sig: RingSig) -> int:
    """Number of key XORs a verifier performs (one per set str bit)."""
    return int(sig.strs.sum())
