from .groups import G1, G2, GT, R, pairing, pairing_check
from .params import SysParams, setup
from .hashing import hash_to_scalar, hash_to_bits, prg_expand, attr_to_scalar
from .ecc import KeyPairEC, ec_keygen, pk_encrypt, pk_decrypt, ec_sign, ec_verify

__all__ = [
    "G1", "G2", "GT", "R", "pairing", "pairing_check",
    "SysParams", "setup",
    "hash_to_scalar", "hash_to_bits", "prg_expand", "attr_to_scalar",
    "KeyPairEC", "ec_keygen", "pk_encrypt", "pk_decrypt", "ec_sign", "ec_verify",
]
