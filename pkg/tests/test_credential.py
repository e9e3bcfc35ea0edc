import dataclasses
import random

import pytest
from hypothesis import given, settings, strategies as st

from a2e import shamir
from a2e.credential import (
    Credential,
    IssuerPublicKey,
    PartialCred,
    ShownCredential,
    aggregate_credential,
    apply_update,
    check_public_key,
    derive_show,
    disclosure_challenges,
    distribute_issue_key,
    expected_cred1,
    issue_commit,
    issue_locally,
    issue_partial,
    issuer_keygen,
    update_partial,
    verify_shown,
)
from a2e.crypto_core.groups import G1, G2, R
from a2e.errors import CredentialError, MalformedInput


def test_public_key_against_secret(params):
    rng = random.Random(30)
    for _ in range(50):
        N = rng.randint(1, 5)
        sk, pk = issuer_keygen(params, N, rng)
        g1, g2 = params.g1, params.g2
        assert pk.K1 == g2 ** sk.k1
        assert all(pk.K2[i] == g2 ** pow(sk.k2, i, R) for i in range(1, N + 1))
        assert set(pk.K2t) == set(range(1, 2 * N + 1)) - {N + 1}
        assert all(pk.K2t[i] == g1 ** pow(sk.k2, i, R) for i in pk.K2t)


def test_public_key_pairing_consistency_and_gap(params):
    sk, pk = issuer_keygen(params, 3, random.Random(31))
    assert check_public_key(pk)
    with pytest.raises(CredentialError):
        pk.k2t(4)
    broken = dataclasses.replace(pk, K2t={**pk.K2t, 5: pk.K2t[5] * params.g1})
    assert not check_public_key(broken)
    assert IssuerPublicKey.from_bytes(pk.to_bytes(), params) == pk


def test_keygen_rejects_bad_n(params):
    with pytest.raises(CredentialError):
        issuer_keygen(params, 0)
    with pytest.raises(CredentialError):
        issuer_keygen(params, params.n_max + 1)


def test_shares_reconstruct_k1(issuance):
    shares = [shamir.Share(s.x, s.fx) for s in issuance.shares]
    assert shamir.reconstruct(shares) == issuance.secret.k1


def test_duplicate_rsu_ids_rejected(params):
    sk, pk = issuer_keygen(params, 2, random.Random(32))
    with pytest.raises(CredentialError, match="x-collision"):
        distribute_issue_key(sk, pk, ["RSU1", "RSU1"], 7)


@settings(max_examples=8)
@given(attrs=st.lists(st.integers(min_value=0, max_value=R - 1), min_size=1, max_size=5),
       seed=st.integers(min_value=0, max_value=2**32))
def test_aggregated_credential_matches_oracle(params, attrs, seed):
    iss = issue_locally(params, attrs, random.Random(seed))
    cred = iss.credential
    assert cred.cred1 == expected_cred1(iss.secret, cred.cred0, attrs)


def test_commitments_multiply_to_cred0(issuance):
    acc = G1.identity()
    for V in issuance.commitments:
        acc = acc * V
    assert issuance.credential.cred0 == acc


def shown_oracle(iss, D, seed):
    """Rebuild a shown credential from the secret and the randomness derive_show draws."""
    secret, pk, cred = iss.secret, iss.pk, iss.credential
    N, k2 = pk.N, secret.k2
    rng = random.Random(seed)
    t1, t2 = rng.randrange(1, R), rng.randrange(R)
    hidden = [i for i in range(1, N + 1) if i not in D]
    attrs = dict(enumerate(cred.attrs, start=1))
    log_credp = (t2 + sum(attrs[i] * pow(k2, i, R) for i in hidden)) % R
    cred0p = cred.cred0 ** t1
    log_cred1 = (secret.k1 + sum(attrs[j] * pow(k2, j, R) for j in attrs)) % R
    cred1p = cred.cred0 ** (t1 * (log_cred1 + t2) % R)
    credp = G2.generator() ** log_credp
    disclosed = tuple((j, attrs[j]) for j in sorted(D))
    tar = disclosure_challenges(disclosed, cred0p, cred1p, credp)
    log_cred2 = sum(tar[j] * pow(k2, N + 1 - j, R) * log_credp for j in D) % R
    return cred0p, cred1p, G1.generator() ** log_cred2, credp


@pytest.mark.parametrize("D", [(1,), (2, 4), (1, 3, 5), (1, 2, 3, 4, 5)])
def test_derive_matches_secret_oracle(issuance, D):
    shown = derive_show(issuance.credential, D, issuance.pk, random.Random(40))
    assert (shown.cred0p, shown.cred1p, shown.cred2p, shown.credp) == shown_oracle(issuance, D, 40)
    assert verify_shown(issuance.pk, shown)


def test_showings_are_rerandomized(issuance):
    a = derive_show(issuance.credential, [1], issuance.pk, random.Random(1))
    b = derive_show(issuance.credential, [1], issuance.pk, random.Random(2))
    assert a.cred0p != b.cred0p and a.cred1p != b.cred1p and a.credp != b.credp


def _mutations(shown, pk):
    g1, g2 = G1.generator(), G2.generator()
    (j0, a0), *rest = shown.disclosed
    yield "cred0 identity", dataclasses.replace(shown, cred0p=G1.identity())
    yield "cred0 changed", dataclasses.replace(shown, cred0p=shown.cred0p * g1)
    yield "cred1 changed", dataclasses.replace(shown, cred1p=shown.cred1p * g1)
    yield "cred2 changed", dataclasses.replace(shown, cred2p=shown.cred2p * g1)
    yield "cred' changed", dataclasses.replace(shown, credp=shown.credp * g2)
    yield "attribute value", dataclasses.replace(shown, disclosed=((j0, (a0 + 1) % R), *rest))
    other = 2 if j0 != 2 else 3
    if other not in shown.positions:
        yield "attribute position", dataclasses.replace(shown, disclosed=tuple(sorted(((other, a0), *rest))))
    yield "extra position", dataclasses.replace(
        shown, disclosed=tuple(sorted(shown.disclosed + ((max(shown.positions) % pk.N + 1, 5),))))
    yield "N mismatch", dataclasses.replace(shown, N=shown.N + 1)
    yield "no positions", dataclasses.replace(shown, disclosed=())
    if len(shown.disclosed) > 1:
        yield "unordered", dataclasses.replace(shown, disclosed=tuple(reversed(shown.disclosed)))


@pytest.mark.parametrize("D", [(1,), (1, 4), (2, 3, 5)])
def test_mutated_showings_are_rejected(issuance, D):
    shown = derive_show(issuance.credential, D, issuance.pk, random.Random(41))
    assert verify_shown(issuance.pk, shown)
    for name, bad in _mutations(shown, issuance.pk):
        assert not verify_shown(issuance.pk, bad), name


def test_swapped_attribute_values_rejected(issuance):
    shown = derive_show(issuance.credential, (1, 2), issuance.pk, random.Random(42))
    (j1, a1), (j2, a2) = shown.disclosed
    swapped = dataclasses.replace(shown, disclosed=((j1, a2), (j2, a1)))
    assert not verify_shown(issuance.pk, swapped)


def test_credential_from_another_issuer_rejected(params, issuance):
    other = issue_locally(params, list(issuance.credential.attrs), random.Random(43))
    shown = derive_show(other.credential, (1, 2), other.pk, random.Random(44))
    assert verify_shown(other.pk, shown)
    assert not verify_shown(issuance.pk, shown)


def test_single_attribute_credential(params):
    iss = issue_locally(params, [12345], random.Random(45))
    shown = derive_show(iss.credential, [1], iss.pk, random.Random(46))
    assert verify_shown(iss.pk, shown)
    assert iss.credential.cred1 == expected_cred1(iss.secret, iss.credential.cred0, [12345])


def test_derive_rejects_bad_positions(issuance):
    for D in ([], [0], [6], [1, 1]):
        with pytest.raises(CredentialError):
            derive_show(issuance.credential, D, issuance.pk)


def test_update_equals_fresh_issuance(issuance):
    cred, shares = issuance.credential, issuance.shares
    new_attrs = list(cred.attrs)
    replaced = []
    for pos, value in ((2, 777), (5, 888)):
        new_attrs[pos - 1] = value
        replaced.append((pos, update_partial(shares[pos - 1], pos, cred.cred0, value), value))
    updated = apply_update(cred, replaced)
    commitments = [cred.cred0] + [G1.identity()] * (len(shares) - 1)
    fresh = aggregate_credential(
        [issue_partial(s, s.index, commitments, new_attrs[s.index - 1], issuance.x_all) for s in shares], new_attrs)
    assert updated.cred1 == fresh.cred1 == expected_cred1(issuance.secret, cred.cred0, new_attrs)
    assert updated.parts[0] == cred.parts[0]  # untouched positions keep their factors
    assert verify_shown(issuance.pk, derive_show(updated, [2, 5], issuance.pk, random.Random(47)))
    assert apply_update(cred, []) is cred


def test_update_errors(issuance):
    cred, share = issuance.credential, issuance.shares[0]
    with pytest.raises(CredentialError):
        update_partial(share, 2, cred.cred0, 1)
    with pytest.raises(CredentialError):
        apply_update(cred, [(6, cred.cred0, 1)])
    with pytest.raises(CredentialError):
        apply_update(cred, [(1, cred.cred0, 1), (1, cred.cred0, 2)])


def test_issuance_errors(issuance):
    s = issuance.shares[0]
    with pytest.raises(CredentialError, match="missing peer"):
        issue_partial(s, s.index, issuance.commitments[:-1], 1, issuance.x_all)
    with pytest.raises(CredentialError):
        issue_partial(s, s.index + 1, issuance.commitments, 1, issuance.x_all)
    partials = list(issuance.partials)
    partials[1] = dataclasses.replace(partials[1], cred0=partials[1].cred0 * G1.generator())
    with pytest.raises(CredentialError, match="inconsistent cred0"):
        aggregate_credential(partials, issuance.credential.attrs)
    with pytest.raises(CredentialError):
        aggregate_credential(issuance.partials[:-1], issuance.credential.attrs)


def test_zero_commitment_warns():
    with pytest.warns(RuntimeWarning):
        issue_commit(v=0)


def test_serialization_round_trips(issuance):
    cred = issuance.credential
    assert Credential.from_bytes(cred.to_bytes()) == cred
    p = issuance.partials[2]
    assert PartialCred.from_bytes(p.to_bytes()) == p
    shown = derive_show(cred, (1, 3), issuance.pk, random.Random(48))
    assert ShownCredential.from_bytes(shown.to_bytes()) == shown
    with pytest.raises(MalformedInput):
        ShownCredential.from_bytes(shown.to_bytes()[:-3])
