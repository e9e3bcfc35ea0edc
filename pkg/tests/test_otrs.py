import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from a2e.crypto_core import wire
from a2e.crypto_core.hashing import H2_TAR, PRG, _expand_py, hash_to_bits
from a2e.errors import MalformedInput, TraceError
from a2e.otrs import (
    MODE_IDS,
    MODE_KEYS,
    RingSig,
    gen_one_time_key,
    match_matrix,
    ring_sign,
    ring_verify,
    size_model_bits,
    trace_match,
    xor_count,
)

L = 256
RNG = random.Random(12)
KEYS = [gen_one_time_key(L=L, lam=128, rng=RNG) for _ in range(40)]
HANDLES = [i.to_bytes(6, "big") for i in range(len(KEYS))]


def ring_of(idx):
    return [KEYS[i].pk for i in idx]


def naive_verify(ring, msg, sig):
    """Loop-and-bytes verifier written without numpy or the library's helpers."""
    rows = []
    for i, pk in enumerate(ring):
        row = b""
        for k in range(L):
            out = _expand_py(sig.seeds[i, k].tobytes(), 16, PRG, 48)
            if sig.strs[i, k]:
                out = bytes(a ^ b for a, b in zip(out, pk.data[48 * k:48 * (k + 1)]))
            row += out
        rows.append(row)
    digest_in = wire.pack([b"".join(pk.fingerprint for pk in ring), b"".join(rows), msg])
    tar = hash_to_bits(digest_in, L, H2_TAR)
    acc = [0] * L
    for i in range(len(ring)):
        acc = [a ^ int(b) for a, b in zip(acc, sig.strs[i])]
    bits = [(tar[k // 8] >> (7 - k % 8)) & 1 for k in range(L)]
    return acc == bits


@pytest.mark.parametrize("M", [1, 2, 5, 10])
def test_completeness_against_naive_oracle(M):
    rng = random.Random(M)
    idx = rng.sample(range(len(KEYS)), M)
    me = rng.randrange(M)
    sig = ring_sign(ring_of(idx), b"message", KEYS[idx[me]], me, rng)
    assert ring_verify(ring_of(idx), b"message", sig)
    assert naive_verify(ring_of(idx), b"message", sig)


@given(seed=st.integers(min_value=0, max_value=2**32), M=st.integers(min_value=1, max_value=12))
def test_sign_verify_property(seed, M):
    rng = random.Random(seed)
    idx = rng.sample(range(len(KEYS)), M)
    me = rng.randrange(M)
    msg = rng.randbytes(rng.randrange(40))
    sig = ring_sign(ring_of(idx), msg, KEYS[idx[me]], me, rng)
    assert ring_verify(ring_of(idx), msg, sig)
    assert not ring_verify(ring_of(idx), msg + b"!", sig)


def test_single_mutations_are_rejected():
    rng = random.Random(13)
    idx = list(range(6))
    sig = ring_sign(ring_of(idx), b"m", KEYS[2], 2, rng)
    for _ in range(50):
        strs, seeds = sig.strs.copy(), sig.seeds.copy()
        if rng.random() < 0.5:
            strs[rng.randrange(6), rng.randrange(L)] ^= 1
        else:
            seeds[rng.randrange(6), rng.randrange(L), rng.randrange(16)] ^= 1 << rng.randrange(8)
        bad = RingSig(sig.ring, strs, seeds, sig.msg)
        assert not ring_verify(ring_of(idx), b"m", bad)
        assert not naive_verify(ring_of(idx), b"m", bad)


def test_wrong_ring_is_rejected():
    rng = random.Random(14)
    sig = ring_sign(ring_of([0, 1, 2]), b"m", KEYS[1], 1, rng)
    assert not ring_verify(ring_of([0, 3, 2]), b"m", sig)
    verdict = ring_verify(ring_of([0, 1]), b"m", sig)
    assert not verdict and verdict.malformed


def test_sign_preconditions():
    with pytest.raises(ValueError):
        ring_sign(ring_of([0, 1]), b"m", KEYS[0], 1)
    with pytest.raises(IndexError):
        ring_sign(ring_of([0, 1]), b"m", KEYS[0], 2)
    with pytest.raises(ValueError):
        ring_sign([], b"m", KEYS[0], 0)


def test_serialization_both_modes():
    rng = random.Random(15)
    idx = [4, 9, 17]
    sig = ring_sign(ring_of(idx), b"m", KEYS[9], 1, rng, [HANDLES[i] for i in idx])
    lookup = dict(zip(HANDLES, (k.pk for k in KEYS)))
    for mode in (MODE_KEYS, MODE_IDS):
        back = RingSig.from_bytes(sig.to_bytes(mode), 128, lookup.__getitem__)
        assert ring_verify(ring_of(idx), b"m", back)
        assert np.array_equal(back.strs, sig.strs) and np.array_equal(back.seeds, sig.seeds)
    with pytest.raises(MalformedInput):
        RingSig.from_bytes(sig.to_bytes(MODE_IDS), 128)  # no directory
    with pytest.raises(MalformedInput):
        RingSig.from_bytes(sig.to_bytes(MODE_IDS), 128, {}.__getitem__)
    with pytest.raises(MalformedInput):
        RingSig.from_bytes(sig.to_bytes(MODE_KEYS)[:-1], 128)


def test_serialized_size_oracle():
    """ids mode: the model's M L (1 + lambda) bits plus framing, byte for byte."""
    rng = random.Random(16)
    M = 20
    idx = list(range(M))
    msg = b"x" * 32
    sig = ring_sign(ring_of(idx), msg, KEYS[0], 0, rng, [HANDLES[i] for i in idx])
    framing = 7 * 4 + 1 + 4 + 4 + M * (4 + 6) + len(msg)
    assert len(sig.to_bytes(MODE_IDS)) == size_model_bits(M, L) // 8 + framing
    assert len(sig.to_bytes(MODE_KEYS)) == size_model_bits(M, L) // 8 + framing - M * 10 + M * L * 48


def test_trace_finds_the_double_signer_and_only_it():
    rng = random.Random(17)
    idx = list(range(10))
    s1 = ring_sign(ring_of(idx), b"a", KEYS[6], 6, rng)
    s2 = ring_sign(ring_of(idx), b"b", KEYS[6], 6, rng)
    s3 = ring_sign(ring_of(idx), b"c", KEYS[2], 2, rng)
    assert trace_match(s1, s2) == 6
    assert trace_match(s1, s3) is None
    assert trace_match(s2, s3) is None


def test_leaked_positions_are_where_the_signer_bits_differ():
    rng = random.Random(18)
    idx = list(range(8))
    s1 = ring_sign(ring_of(idx), b"a", KEYS[5], 5, rng)
    s2 = ring_sign(ring_of(idx), b"b", KEYS[5], 5, rng)
    mm = match_matrix(s1, s2)
    assert np.array_equal(mm[5], s1.strs[5] != s2.strs[5])
    assert not mm[np.arange(8) != 5].any()
    assert mm[5].sum() > L // 4  # half the positions on average


def test_trace_refuses_bad_inputs():
    rng = random.Random(19)
    s1 = ring_sign(ring_of([0, 1, 2]), b"a", KEYS[0], 0, rng)
    s2 = ring_sign(ring_of([0, 1, 3]), b"b", KEYS[0], 0, rng)
    with pytest.raises(TraceError):
        trace_match(s1, s2)
    forged = RingSig(s1.ring, s1.strs ^ np.eye(3, L, dtype=np.uint8), s1.seeds, b"a")
    with pytest.raises(TraceError):
        trace_match(s1, forged)


def test_distinct_keys():
    rng = random.Random(20)
    fps = {gen_one_time_key(L=L, lam=128, rng=rng).pk.fingerprint for _ in range(1000)}
    assert len(fps) == 1000


def test_xor_count():
    rng = random.Random(21)
    sig = ring_sign(ring_of([0, 1, 2, 3]), b"m", KEYS[3], 3, rng)
    assert xor_count(sig) == int(sig.strs.sum())
    assert 0.4 < xor_count(sig) / (4 * L) < 0.6


def test_default_key_shape():
    assert gen_one_time_key(rng=random.Random(22)).pk.data.__len__() == 256 * 48
