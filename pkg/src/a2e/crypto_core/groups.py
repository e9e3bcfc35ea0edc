"""Pairing groups G1, G2, GT written multiplicatively.

``a * b`` is the group operation and ``a ** k`` exponentiation by an
integer scalar (reduced mod the group order ``R``).  ``precompute()``
attaches a fixed-base table so later exponentiations of that element are
several times faster; it is worth it for long-lived public-key elements.
"""

from collections import OrderedDict
from threading import Lock

from . import bls12_381 as c
from ..errors import MalformedInput

R = c.R

# Tables are keyed by the point encoding, so every holder of the same public
# element (each simulated RSU, the user, ...) shares one table.
_TABLE_CACHE_SIZE = 32
_tables = OrderedDict()
_tables_lock = Lock()


def _shared_table(pt_obj):
    key = (pt_obj._group_id, pt_obj.to_bytes())
    with _tables_lock:
        table = _tables.get(key)
        if table is not None:
            _tables.move_to_end(key)
            return table
    table = c.AffineComb(pt_obj.pt, pt_obj._group_id, pt_obj._window)
    with _tables_lock:
        _tables[key] = table
        while len(_tables) > _TABLE_CACHE_SIZE:
            _tables.popitem(last=False)
    return table


class _Point:
    __slots__ = ("pt", "_table", "_aff")
    _add = _dbl = _neg = _mul = _eq = _affine = _compress = _decompress = None
    _inf = None
    _gen = None
    SIZE = 0
    _window = 4
    _group_id = 0

    def __init__(self, pt):
        self.pt = pt
        self._table = None
        self._aff = False

    @classmethod
    def identity(cls):
        return cls(cls._inf)

    @classmethod
    def generator(cls):
        return cls(cls._gen)

    def affine(self):
        if self._aff is False:
            self._aff = type(self)._affine(self.pt)
        return self._aff

    @property
    def is_identity(self):
        return self.affine() is None

    def precompute(self):
        """Build the fixed-base table in place (idempotent); returns self."""
        if self._table is None:
            self._table = _shared_table(self)
        return self

    def __mul__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return type(self)(type(self)._add(self.pt, other.pt))

    def __truediv__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self * other.inverse()

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if self._table is not None:
            return type(self)(self._table.mul(k))
        return type(self)(type(self)._mul(self.pt, k))

    def inverse(self):
        return type(self)(type(self)._neg(self.pt))

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return type(self)._eq(self.pt, other.pt)

    def __hash__(self):
        return hash(self.to_bytes())

    def to_bytes(self):
        return type(self)._compress(self.pt)

    @classmethod
    def from_bytes(cls, data):
        """Decode a compressed point, checking curve and subgroup membership."""
        try:
            return cls(cls._decompress(bytes(data)))
        except ValueError as exc:
            raise MalformedInput(f"{cls.__name__}: {exc}") from exc

    def __repr__(self):
        return f"{type(self).__name__}({self.to_bytes().hex()[:16]}...)"


class G1(_Point):
    __slots__ = ()
    _add = staticmethod(c.g1_add)
    _neg = staticmethod(c.g1_neg)
    _mul = staticmethod(c.g1_mul)
    _eq = staticmethod(c.g1_eq)
    _affine = staticmethod(c.g1_affine)
    _compress = staticmethod(c.g1_compress)
    _decompress = staticmethod(c.g1_decompress)
    _inf = c.G1_INF
    _gen = c.G1_GEN
    _group_id = 1
    _window = 8
    SIZE = 48


class G2(_Point):
    __slots__ = ()
    _add = staticmethod(c.g2_add)
    _neg = staticmethod(c.g2_neg)
    _mul = staticmethod(c.g2_mul)
    _eq = staticmethod(c.g2_eq)
    _affine = staticmethod(c.g2_affine)
    _compress = staticmethod(c.g2_compress)
    _decompress = staticmethod(c.g2_decompress)
    _inf = c.G2_INF
    _gen = c.G2_GEN
    _group_id = 2
    _window = 8
    SIZE = 96


class GT:
    __slots__ = ("f",)
    SIZE = 576

    def __init__(self, f):
        self.f = f

    @classmethod
    def identity(cls):
        return cls(c.FP12_ONE)

    @property
    def is_identity(self):
        return self.f == c.FP12_ONE

    def __mul__(self, other):
        if not isinstance(other, GT):
            return NotImplemented
        return GT(c.fp12_mul(self.f, other.f))

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        # unitary after the final exponentiation
        return GT(c.fp12_pow_unitary(self.f, k % R))

    def inverse(self):
        return GT(c.fp12_conj(self.f))

    def __eq__(self, other):
        if not isinstance(other, GT):
            return NotImplemented
        return self.f == other.f

    def __hash__(self):
        return hash(self.f)

    def to_bytes(self):
        return c.fp12_to_bytes(self.f)

    @classmethod
    def from_bytes(cls, data):
        try:
            return cls(c.fp12_from_bytes(bytes(data)))
        except ValueError as exc:
            raise MalformedInput(f"GT: {exc}") from exc

    def __repr__(self):
        return f"GT({self.to_bytes().hex()[:16]}...)"


def pairing(a: G1, b: G2) -> GT:
    return GT(c.pairing(a.pt, b.pt))


def pairing_check(pairs) -> bool:
    """True iff the product of e(a_i, b_i) over ``pairs`` is the identity."""
    aff = [(a.affine(), b.affine()) for a, b in pairs]
    return c.final_exponentiation(c.miller_loop(aff)) == c.FP12_ONE
