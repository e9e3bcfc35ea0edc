"""Shamir secret sharing over a prime field with Lagrange reconstruction.

The field defaults to the pairing group order, but every function takes
``p`` so small fields can be used in tests.
"""

import random
from dataclasses import dataclass
from typing import Sequence

from .crypto_core.groups import R
from .crypto_core import wire
from .errors import ShareError, MalformedInput


@dataclass(frozen=True)
class Share:
    x: int
    y: int

    def to_bytes(self) -> bytes:
        return wire.pack([self.x.to_bytes(32, "big"), self.y.to_bytes(32, "big")])

    @classmethod
    def from_bytes(cls, data, p=R):
        x, y = (int.from_bytes(v, "big") for v in _scalars(data, 2))
        if not (0 < x < p and y < p):
            raise MalformedInput("share out of range")
        return cls(x, y)


def _scalars(data, count):
    parts = wire.unpack(data, count)
    if any(len(v) != 32 for v in parts):
        raise MalformedInput("scalars are 32 bytes")
    return parts


def _check_points(points, p):
    if not points:
        raise ShareError("empty point set")
    seen = set()
    for x in points:
        x %= p
        if x == 0:
            raise ShareError("evaluation point 0 would reveal the secret")
        if x in seen:
            raise ShareError("duplicate evaluation point")
        seen.add(x)


def eval_poly(coeffs: Sequence[int], x: int, p: int = R) -> int:
    acc = 0
    for a in reversed(coeffs):
        acc = (acc * x + a) % p
    return acc


def share(secret, points, threshold, p=R, rng=None, coeffs=None):
    """Split ``secret`` into ``f(x)`` for each x in ``points``.

    ``f`` has degree ``threshold - 1`` and ``f(0) = secret``.  The upper
    coefficients come from ``rng`` unless ``coeffs`` (a1, a2, ...) are given.
    """
    points = list(points)
    _check_points(points, p)
    if not 0 < threshold <= len(points):
        raise ShareError(f"threshold {threshold} out of range for {len(points)} points")
    if coeffs is None:
        rng = rng or random.SystemRandom()
        coeffs = [rng.randrange(p) for _ in range(threshold - 1)]
    elif len(coeffs) != threshold - 1:
        raise ShareError("need exactly threshold - 1 coefficients")
    poly = [secret % p] + [c % p for c in coeffs]
    return [Share(x % p, eval_poly(poly, x, p)) for x in points]


def lagrange_at_zero(i, points, p=R):
    """Coefficient of f(points[i]) when interpolating f(0)."""
    points = [x % p for x in points]
    _check_points(points, p)
    if not 0 <= i < len(points):
        raise IndexError("share index out of range")
    xi = points[i]
    num = den = 1
    for j, xj in enumerate(points):
        if j != i:
            num = num * -xj % p
            den = den * (xi - xj) % p
    return num * pow(den, -1, p) % p


def lagrange_coefficients(points, p=R):
    return [lagrange_at_zero(i, points, p) for i in range(len(points))]


def reconstruct(shares, p=R):
    shares = list(shares)
    if not shares:
        raise ShareError("no shares")
    xs = [s.x for s in shares]
    _check_points(xs, p)
    return sum(s.y * lam for s, lam in zip(shares, lagrange_coefficients(xs, p))) % p
