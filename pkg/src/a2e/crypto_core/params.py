"""System parameters."""

from dataclasses import dataclass
from functools import lru_cache

from . import ecc
from .groups import G1, G2, GT, R
from ..errors import UnsupportedParameter

CURVE_PROFILE = "BLS12-381"
SUPPORTED_LAMBDA = (128,)


@dataclass(frozen=True)
class SysParams:
    lam: int
    p: int
    L: int
    n_max: int
    g1: G1
    g2: G2
    gE: ecc.ECPoint
    curve: str = CURVE_PROFILE
    ge_curve: str = "P-256"

    @property
    def seed_bytes(self):
        return self.lam // 8

    @property
    def pk_row_bytes(self):
        """One PRG output, 3 lambda bits."""
        return 3 * self.lam // 8

    @property
    def L_bytes(self):
        return (self.L + 7) // 8

    def sizes(self):
        """Serialized element sizes in bits."""
        return {
            "GE": ecc.POINT_SIZE * 8,
            "G1": G1.SIZE * 8,
            "G2": G2.SIZE * 8,
            "GT": GT.SIZE * 8,
            "Zp": 32 * 8,
            "p_bits": self.p.bit_length(),
        }


@lru_cache(maxsize=None)
def setup(lam: int = 128, n_max: int = 5, l_bits: int = 256) -> SysParams:
    if lam not in SUPPORTED_LAMBDA:
        raise UnsupportedParameter(f"unsupported lambda {lam}; supported: {SUPPORTED_LAMBDA}")
    if n_max < 1:
        raise UnsupportedParameter("n_max must be at least 1")
    if l_bits < lam:
        raise UnsupportedParameter("l_bits must be at least lambda")
    if l_bits % 8:
        raise UnsupportedParameter("l_bits must be a multiple of 8")
    return SysParams(
        lam=lam,
        p=R,
        L=l_bits,
        n_max=n_max,
        g1=G1.generator().precompute(),
        g2=G2.generator().precompute(),
        gE=ecc.generator(),
    )
