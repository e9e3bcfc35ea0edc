import itertools
import random

import pytest
from hypothesis import given, strategies as st

from a2e import shamir
from a2e.crypto_core.groups import G1, R
from a2e.errors import ShareError


def naive_lagrange_at_zero(i, xs, p):
    """Independent oracle: product of x_j / (x_j - x_i) with Fermat inverses."""
    out = 1
    for j, xj in enumerate(xs):
        if j != i:
            out = out * xj * pow(xj - xs[i], p - 2, p) % p
    return out


def test_small_field_example():
    shares = [shamir.Share(1, 49), shamir.Share(2, 56)]
    assert shamir.reconstruct(shares, 97) == 42
    assert shamir.lagrange_coefficients([1, 2], 97) == [2, 96]


@given(
    secret=st.integers(min_value=0, max_value=R - 1),
    n=st.integers(min_value=1, max_value=7),
    data=st.data(),
)
def test_any_threshold_subset_reconstructs(secret, n, data):
    t = data.draw(st.integers(min_value=1, max_value=n))
    xs = data.draw(st.lists(st.integers(min_value=1, max_value=R - 1), min_size=n, max_size=n, unique=True))
    shares = shamir.share(secret, xs, t, rng=random.Random(n))
    subset = data.draw(st.permutations(shares))[: data.draw(st.integers(min_value=t, max_value=n))]
    assert shamir.reconstruct(subset) == secret


@given(xs=st.lists(st.integers(min_value=1, max_value=10**6), min_size=1, max_size=6, unique=True))
def test_lagrange_matches_oracle(xs):
    p = R
    assert shamir.lagrange_coefficients(xs, p) == [naive_lagrange_at_zero(i, xs, p) for i in range(len(xs))]
    assert sum(shamir.lagrange_coefficients(xs, p)) % p == 1


def test_every_subset_n5():
    rng = random.Random(8)
    for t in (3, 5):
        secret = rng.randrange(R)
        shares = shamir.share(secret, [11, 22, 33, 44, 55], t, rng=rng)
        for k in range(1, 6):
            for sub in itertools.combinations(shares, k):
                assert (shamir.reconstruct(sub) == secret) == (k >= t)


def test_interpolation_in_the_exponent():
    rng = random.Random(9)
    secret = rng.randrange(R)
    xs = [3, 5, 7, 9, 11]
    shares = shamir.share(secret, xs, 5, rng=rng)
    base = G1.generator() ** rng.randrange(1, R)
    acc = G1.identity()
    for s, lam in zip(shares, shamir.lagrange_coefficients(xs)):
        acc = acc * base ** (s.y * lam % R)
    assert acc == base ** secret


def test_share_serialization():
    s = shamir.Share(5, 12345)
    assert shamir.Share.from_bytes(s.to_bytes()) == s


@pytest.mark.parametrize("points, t", [([1, 1, 2], 2), ([0, 1, 2], 2), ([1, 2], 3), ([1, 2], 0)])
def test_bad_inputs(points, t):
    with pytest.raises(ShareError):
        shamir.share(7, points, t)


def test_reconstruct_needs_shares():
    with pytest.raises(ShareError):
        shamir.reconstruct([])
    with pytest.raises(ShareError):
        shamir.reconstruct([shamir.Share(1, 2), shamir.Share(1, 3)])
