"""The plain elliptic-curve group GE with public-key encryption and signatures.

GE is NIST P-256.  Encryption is ECIES (ephemeral ECDH, HKDF-SHA256,
AES-256-GCM); signatures are deterministic ECDSA-SHA256 encoded as r||s.
"""

from dataclasses import dataclass, field

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import ec
from cryptography.hazmat.primitives.asymmetric.utils import (
    decode_dss_signature,
    encode_dss_signature,
)
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from ..errors import DecryptionError, MalformedInput

CURVE = ec.SECP256R1()
ORDER = 0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551
POINT_SIZE = 33
SIG_SIZE = 64
_NONCE = 12
_TAG = 16
_INFO = b"a2e-ecies"
_COMPRESSED = serialization.PublicFormat.CompressedPoint
_X962 = serialization.Encoding.X962


def _pub_bytes(pub) -> bytes:
    return pub.public_bytes(_X962, _COMPRESSED)


class ECPoint:
    """A point of GE, held as a ``cryptography`` public key."""

    __slots__ = ("key", "_enc")

    def __init__(self, key):
        self.key = key
        self._enc = _pub_bytes(key)

    def to_bytes(self) -> bytes:
        return self._enc

    @classmethod
    def from_bytes(cls, data):
        if len(data) != POINT_SIZE:
            raise MalformedInput("GE point must be 33 bytes")
        try:
            return cls(ec.EllipticCurvePublicKey.from_encoded_point(CURVE, bytes(data)))
        except ValueError as exc:
            raise MalformedInput("invalid GE point") from exc

    def __eq__(self, other):
        return isinstance(other, ECPoint) and self._enc == other._enc

    def __hash__(self):
        return hash(self._enc)

    def __repr__(self):
        return f"ECPoint({self._enc.hex()[:16]}...)"


def base_mul(sk: int) -> ECPoint:
    """sk * gE."""
    return ECPoint(ec.derive_private_key(sk, CURVE).public_key())


def generator() -> ECPoint:
    return base_mul(1)


@dataclass(frozen=True)
class KeyPairEC:
    sk: int
    pk: ECPoint = field(compare=False)

    @classmethod
    def from_secret(cls, sk):
        if not 0 < sk < ORDER:
            raise ValueError("EC secret out of range")
        return cls(sk, base_mul(sk))


def ec_keygen(rng) -> KeyPairEC:
    return KeyPairEC.from_secret(rng.randrange(1, ORDER))


def _private(sk):
    return ec.derive_private_key(sk, CURVE)


def pk_encrypt(pk: ECPoint, plaintext: bytes, rng) -> bytes:
    """ECIES: eph_pub(33) || nonce(12) || AES-GCM ciphertext with tag."""
    eph = _private(rng.randrange(1, ORDER))
    eph_pub = _pub_bytes(eph.public_key())
    key = _kdf(eph.exchange(ec.ECDH(), pk.key), eph_pub, pk.to_bytes())
    nonce = rng.randbytes(_NONCE)
    return eph_pub + nonce + AESGCM(key).encrypt(nonce, bytes(plaintext), eph_pub)


def pk_decrypt(sk: int, ct: bytes) -> bytes:
    if len(ct) < POINT_SIZE + _NONCE + _TAG:
        raise DecryptionError("ciphertext too short")
    eph_pub = bytes(ct[:POINT_SIZE])
    nonce = bytes(ct[POINT_SIZE:POINT_SIZE + _NONCE])
    try:
        eph = ec.EllipticCurvePublicKey.from_encoded_point(CURVE, eph_pub)
    except ValueError as exc:
        raise DecryptionError("bad ephemeral key") from exc
    priv = _private(sk)
    key = _kdf(priv.exchange(ec.ECDH(), eph), eph_pub, _pub_bytes(priv.public_key()))
    try:
        return AESGCM(key).decrypt(nonce, bytes(ct[POINT_SIZE + _NONCE:]), eph_pub)
    except InvalidTag as exc:
        raise DecryptionError("authentication tag mismatch") from exc


def _kdf(shared, eph_pub, recipient):
    return HKDF(hashes.SHA256(), 32, salt=None, info=_INFO + eph_pub + recipient).derive(shared)


def ciphertext_size(plain_len: int) -> int:
    return POINT_SIZE + _NONCE + plain_len + _TAG


_ECDSA = ec.ECDSA(hashes.SHA256(), deterministic_signing=True)


def ec_sign(sk: int, msg: bytes) -> bytes:
    r, s = decode_dss_signature(_private(sk).sign(bytes(msg), _ECDSA))
    return r.to_bytes(32, "big") + s.to_bytes(32, "big")


def ec_verify(pk: ECPoint, msg: bytes, sig: bytes) -> bool:
    if len(sig) != SIG_SIZE:
        return False
    der = encode_dss_signature(int.from_bytes(sig[:32], "big"), int.from_bytes(sig[32:], "big"))
    try:
        pk.key.verify(der, bytes(msg), _ECDSA)
    except InvalidSignature:
        return False
    return True
