"""Attribute credentials with threshold issuance and selective disclosure.

The issuer secret is (k1, k2).  Public elements are powers of k2 in both
source groups, with g1^(k2^(N+1)) deliberately left out so a holder cannot
open an undisclosed position.  k1 is Shamir-shared among N RSUs; RSU i
contributes cred0^(f(x_i) lambda_i) and cred0^((k2^i) attr_i), and the
product over all RSUs is cred1 = cred0^(k1 + sum_j attr_j k2^j).
"""

import random
import warnings
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, Sequence, Tuple

from .crypto_core import wire
from .crypto_core.groups import G1, G2, R, pairing_check
from .crypto_core.hashing import H1_TAR, H1_X, hash_to_scalar
from .errors import CredentialError, MalformedInput, Rejected
from . import shamir


def _sc(v: int) -> bytes:
    return v.to_bytes(32, "big")


def _unsc(b: bytes) -> int:
    if len(b) != 32:
        raise MalformedInput("scalar must be 32 bytes")
    v = int.from_bytes(b, "big")
    if v >= R:
        raise MalformedInput("scalar not reduced")
    return v


@dataclass(frozen=True)
class IssuerSecret:
    k1: int
    k2: int


@dataclass(eq=False)
class IssuerPublicKey:
    N: int
    K1: G2
    K2: Dict[int, G2]
    K2t: Dict[int, G1]
    g1: G1 = field(default_factory=G1.generator, repr=False)
    g2: G2 = field(default_factory=G2.generator, repr=False)

    @staticmethod
    def tilde_indices(N):
        return list(range(1, N + 1)) + list(range(N + 2, 2 * N + 1))

    def k2(self, i) -> G2:
        """K2[i] with its fixed-base table built on first use."""
        return self.K2[i].precompute()

    def k2t(self, i) -> G1:
        if i == self.N + 1:
            raise CredentialError("index N+1 is never published")
        return self.K2t[i].precompute()

    def to_bytes(self) -> bytes:
        return wire.pack([
            wire.pack_int(self.N),
            self.K1.to_bytes(),
            wire.pack([self.K2[i].to_bytes() for i in range(1, self.N + 1)]),
            wire.pack([self.K2t[i].to_bytes() for i in self.tilde_indices(self.N)]),
        ])

    @classmethod
    def from_bytes(cls, data, params=None):
        n_b, k1_b, k2_b, k2t_b = wire.unpack(data, 4)
        N = wire.unpack_int(n_b)
        if N < 1:
            raise MalformedInput("N must be positive")
        idx = cls.tilde_indices(N)
        K2 = {i + 1: G2.from_bytes(b) for i, b in enumerate(wire.unpack(k2_b, N))}
        K2t = {i: G1.from_bytes(b) for i, b in zip(idx, wire.unpack(k2t_b, len(idx)))}
        extra = {} if params is None else {"g1": params.g1, "g2": params.g2}
        return cls(N, G2.from_bytes(k1_b), K2, K2t, **extra)

    def __eq__(self, other):
        return isinstance(other, IssuerPublicKey) and self.to_bytes() == other.to_bytes()


def issuer_keygen(params, N: int, rng=None) -> Tuple[IssuerSecret, IssuerPublicKey]:
    if not 1 <= N <= params.n_max:
        raise CredentialError(f"N={N} outside [1, {params.n_max}]")
    rng = rng or random.SystemRandom()
    k1 = rng.randrange(1, R)
    k2 = rng.randrange(1, R)
    powers = {i: pow(k2, i, R) for i in range(1, 2 * N + 1)}
    pk = IssuerPublicKey(
        N=N,
        K1=params.g2 ** k1,
        K2={i: params.g2 ** powers[i] for i in range(1, N + 1)},
        K2t={i: params.g1 ** powers[i] for i in IssuerPublicKey.tilde_indices(N)},
        g1=params.g1,
        g2=params.g2,
    )
    return IssuerSecret(k1, k2), pk


def check_public_key(pk: IssuerPublicKey) -> bool:
    """Pairing consistency of the published powers (no secret needed)."""
    g1, g2 = pk.g1, pk.g2
    if pk.N + 1 in pk.K2t:
        return False
    for i in range(1, pk.N + 1):
        if not pairing_check([(pk.K2t[i], g2), (g1.inverse(), pk.K2[i])]):
            return False
    idx = IssuerPublicKey.tilde_indices(pk.N)
    for a, b in zip(idx, idx[1:]):
        if b == a + 1 and not pairing_check([(pk.K2t[b], g2), (pk.K2t[a].inverse(), pk.K2[1])]):
            return False
    return True


@dataclass(frozen=True)
class IssuerShare:
    index: int  # attribute position handled by this RSU, 1..N
    x: int
    fx: int
    k2: int
    pk: IssuerPublicKey = field(repr=False, compare=False)

    def payload(self) -> bytes:
        """What SP encrypts to the RSU: (index, x, f(x), k2)."""
        return wire.pack([wire.pack_int(self.index, 2), _sc(self.x), _sc(self.fx), _sc(self.k2)])

    @classmethod
    def from_payload(cls, data, pk):
        i_b, x_b, fx_b, k2_b = wire.unpack(data, 4)
        return cls(wire.unpack_int(i_b, 2), _unsc(x_b), _unsc(fx_b), _unsc(k2_b), pk)


def derive_points(rsu_ids: Sequence[str], sk_sp: int, salt: int = 0):
    """x_i = H1(ID_i, sk_SP), with a counter appended when salt > 0."""
    out = []
    for rid in rsu_ids:
        parts = [rid.encode("utf-8"), _sc(sk_sp)]
        if salt:
            parts.append(wire.pack_int(salt))
        out.append(hash_to_scalar(wire.pack(parts), H1_X))
    return out


def distribute_issue_key(secret: IssuerSecret, pk: IssuerPublicKey, rsu_ids: Sequence[str],
                         sk_sp: int, rng=None, threshold=None, max_salt=16):
    """Shamir-share k1 over points derived from the RSU identities.

    Returns (shares, x list).  Share i is for rsu_ids[i] and position i+1.
    """
    rsu_ids = list(rsu_ids)
    if len(rsu_ids) != pk.N:
        raise CredentialError(f"need exactly N={pk.N} RSUs, got {len(rsu_ids)}")
    if len(set(rsu_ids)) != len(rsu_ids):
        raise CredentialError("x-collision: duplicate RSU identity")
    for salt in range(max_salt):
        xs = derive_points(rsu_ids, sk_sp, salt)
        if len(set(xs)) == len(xs) and 0 not in xs:
            break
    else:
        raise CredentialError("x-collision persists after salting")
    threshold = threshold or pk.N
    ys = shamir.share(secret.k1, xs, threshold, rng=rng)
    shares = [IssuerShare(i + 1, s.x, s.y, secret.k2, pk) for i, s in enumerate(ys)]
    return shares, xs


def issue_commit(rng=None, v=None):
    """(v, V = g1^v) for one issuance round."""
    if v is None:
        v = (rng or random.SystemRandom()).randrange(R)
    if v % R == 0:
        warnings.warn("issuance commitment v = 0 gives the identity", RuntimeWarning, stacklevel=2)
    return v, G1.generator().precompute() ** v


@dataclass(frozen=True)
class PartialCred:
    index: int
    cred0: G1
    cred1: G1
    cred2: G1

    def to_bytes(self):
        return wire.pack([wire.pack_int(self.index, 2), self.cred0.to_bytes(),
                          self.cred1.to_bytes(), self.cred2.to_bytes()])

    @classmethod
    def from_bytes(cls, data):
        i_b, c0, c1, c2 = wire.unpack(data, 4)
        return cls(wire.unpack_int(i_b, 2), G1.from_bytes(c0), G1.from_bytes(c1), G1.from_bytes(c2))


def combine_commitments(commitments: Iterable[G1]) -> G1:
    out = G1.identity()
    for V in commitments:
        out = out * V
    return out


def issue_partial(share: IssuerShare, index: int, commitments: Sequence[G1], attr: int,
                  x_all: Sequence[int]) -> PartialCred:
    N = share.pk.N
    if index != share.index:
        raise CredentialError("share does not cover this position")
    if len(commitments) != N:
        raise CredentialError(f"missing peer commitments: have {len(commitments)} of {N}")
    if len(x_all) != N:
        raise CredentialError("x list has wrong length")
    try:
        pos = list(x_all).index(share.x)
    except ValueError:
        raise CredentialError("share point missing from the published x list") from None
    cred0 = combine_commitments(commitments)
    lam = shamir.lagrange_at_zero(pos, x_all)
    cred1 = cred0 ** (share.fx * lam % R)
    cred2 = cred0 ** (pow(share.k2, index, R) * attr % R)
    return PartialCred(index, cred0, cred1, cred2)


def update_partial(share: IssuerShare, index: int, cred0: G1, new_attr: int) -> G1:
    """Replacement cred2 for ``index`` after the attribute changes."""
    if not 1 <= index <= share.pk.N or index != share.index:
        raise CredentialError(f"unknown position {index}")
    return cred0 ** (pow(share.k2, index, R) * new_attr % R)


@dataclass(frozen=True)
class Credential:
    """Aggregated credential plus the per-position factors kept for updates."""

    cred0: G1
    cred1: G1
    parts: Tuple[Tuple[G1, G1], ...]  # (cred1_i, cred2_i) for i = 1..N
    attrs: Tuple[int, ...]  # attribute scalars for positions 1..N

    @property
    def N(self):
        return len(self.attrs)

    def to_bytes(self):
        return wire.pack([
            self.cred0.to_bytes(),
            self.cred1.to_bytes(),
            wire.pack([a.to_bytes() + b.to_bytes() for a, b in self.parts]),
            wire.pack([_sc(a) for a in self.attrs]),
        ])

    @classmethod
    def from_bytes(cls, data):
        c0, c1, parts_b, attrs_b = wire.unpack(data, 4)
        parts = []
        for p in wire.unpack(parts_b):
            if len(p) != 2 * G1.SIZE:
                raise MalformedInput("credential part has wrong size")
            parts.append((G1.from_bytes(p[:G1.SIZE]), G1.from_bytes(p[G1.SIZE:])))
        attrs = tuple(_unsc(a) for a in wire.unpack(attrs_b))
        if len(parts) != len(attrs):
            raise MalformedInput("parts and attributes disagree in length")
        return cls(G1.from_bytes(c0), G1.from_bytes(c1), tuple(parts), attrs)


def _product_of_parts(parts):
    out = G1.identity()
    for a, b in parts:
        out = out * a * b
    return out


def aggregate_credential(partials: Sequence[PartialCred], attrs: Sequence[int]) -> Credential:
    attrs = tuple(a % R for a in attrs)
    N = len(attrs)
    if len(partials) != N:
        raise CredentialError(f"wrong count: {len(partials)} partials for {N} attributes")
    by_index = {p.index: p for p in partials}
    if sorted(by_index) != list(range(1, N + 1)):
        raise CredentialError("partials must cover positions 1..N exactly once")
    cred0 = partials[0].cred0
    if any(p.cred0 != cred0 for p in partials):
        raise CredentialError("inconsistent cred0 across RSUs")
    if cred0.is_identity:
        warnings.warn("cred0 is the identity", RuntimeWarning, stacklevel=2)
    parts = tuple((by_index[i].cred1, by_index[i].cred2) for i in range(1, N + 1))
    return Credential(cred0, _product_of_parts(parts), parts, attrs)


def apply_update(cred: Credential, replaced: Sequence[Tuple[int, G1, int]]) -> Credential:
    if not cred.parts or len(cred.parts) != cred.N:
        raise CredentialError("missing retained parts")
    parts = list(cred.parts)
    attrs = list(cred.attrs)
    seen = set()
    for index, cred2, new_attr in replaced:
        if not 1 <= index <= cred.N:
            raise CredentialError(f"position {index} out of range 1..{cred.N}")
        if index in seen:
            raise CredentialError(f"position {index} updated twice")
        seen.add(index)
        parts[index - 1] = (parts[index - 1][0], cred2)
        attrs[index - 1] = new_attr % R
    if not seen:
        return cred
    parts = tuple(parts)
    return replace(cred, cred1=_product_of_parts(parts), parts=parts, attrs=tuple(attrs))


def verify_credential(pk: IssuerPublicKey, cred: Credential):
    """Holder-side check of an aggregated credential: e(cred0, K1 prod K2_j^attr_j) = e(cred1, g2)."""
    if cred.N != pk.N:
        return Rejected("credential and issuer key disagree on N", malformed=True)
    if cred.cred0.is_identity:
        return Rejected("cred0 is the identity")
    rhs = pk.K1
    for j, a in enumerate(cred.attrs, start=1):
        rhs = rhs * pk.k2(j) ** a
    if not pairing_check([(cred.cred0, rhs), (cred.cred1.inverse(), pk.g2)]):
        return Rejected("aggregated credential does not verify")
    return True


def expected_cred1(secret: IssuerSecret, cred0: G1, attrs: Sequence[int]) -> G1:
    """Test oracle: cred0^(k1 + sum_j attr_j k2^j) computed from the secret."""
    e = secret.k1
    for j, a in enumerate(attrs, start=1):
        e += a * pow(secret.k2, j, R)
    return cred0 ** (e % R)


@dataclass(frozen=True)
class ShownCredential:
    N: int
    cred0p: G1
    cred1p: G1
    cred2p: G1
    credp: G2
    disclosed: Tuple[Tuple[int, int], ...]  # (position, attribute scalar), ascending

    @property
    def positions(self):
        return tuple(j for j, _ in self.disclosed)

    def to_bytes(self) -> bytes:
        return wire.pack([
            wire.pack_int(self.N, 2),
            self.cred0p.to_bytes(),
            self.cred1p.to_bytes(),
            self.cred2p.to_bytes(),
            self.credp.to_bytes(),
            _disclosed_bytes(self.disclosed),
        ])

    @classmethod
    def from_bytes(cls, data):
        n_b, c0, c1, c2, cp, d_b = wire.unpack(data, 6)
        disclosed = []
        for item in wire.unpack(d_b):
            j_b, a_b = wire.unpack(item, 2)
            disclosed.append((wire.unpack_int(j_b, 2), _unsc(a_b)))
        return cls(wire.unpack_int(n_b, 2), G1.from_bytes(c0), G1.from_bytes(c1),
                   G1.from_bytes(c2), G2.from_bytes(cp), tuple(disclosed))


def _disclosed_bytes(disclosed):
    return wire.pack([wire.pack([wire.pack_int(j, 2), _sc(a)]) for j, a in disclosed])


def disclosure_challenges(disclosed, cred0p, cred1p, credp):
    """tar_j = H1(disclosed attributes, j, cred0', cred1', cred') for each disclosed j."""
    head = _disclosed_bytes(disclosed)
    common = [cred0p.to_bytes(), cred1p.to_bytes(), credp.to_bytes()]
    return {j: hash_to_scalar(wire.pack([head, wire.pack_int(j, 2)] + common), H1_TAR)
            for j, _ in disclosed}


def _check_positions(D, N):
    D = sorted(D)
    if not D:
        raise CredentialError("disclosure set is empty")
    if len(set(D)) != len(D):
        raise CredentialError("disclosure set repeats a position")
    if D[0] < 1 or D[-1] > N:
        raise CredentialError(f"disclosed position outside 1..{N}")
    return D


def derive_show(cred: Credential, D: Iterable[int], pk: IssuerPublicKey, rng=None) -> ShownCredential:
    N = pk.N
    if cred.N != N:
        raise CredentialError("credential and issuer key disagree on N")
    D = _check_positions(D, N)
    hidden = [i for i in range(1, N + 1) if i not in D]
    rng = rng or random.SystemRandom()
    t1 = rng.randrange(1, R)
    t2 = rng.randrange(R)
    attr = dict(enumerate(cred.attrs, start=1))

    cred0p = cred.cred0 ** t1
    cred1p = cred.cred1 ** t1 * cred0p ** t2
    credp = pk.g2 ** t2
    for i in hidden:
        credp = credp * pk.k2(i) ** attr[i]
    disclosed = tuple((j, attr[j]) for j in D)
    tar = disclosure_challenges(disclosed, cred0p, cred1p, credp)

    cred2p = G1.identity()
    for j in D:
        inner = pk.k2t(N + 1 - j) ** t2
        for i in hidden:
            inner = inner * pk.k2t(N + 1 + i - j) ** attr[i]
        cred2p = cred2p * inner ** tar[j]
    return ShownCredential(N, cred0p, cred1p, cred2p, credp, disclosed)


def verify_shown(pk: IssuerPublicKey, shown: ShownCredential):
    """True, or a falsy :class:`Rejected`."""
    N = pk.N
    if shown.N != N:
        return Rejected("N differs from the issuer key", malformed=True)
    try:
        D = _check_positions(shown.positions, N)
    except CredentialError as exc:
        return Rejected(str(exc), malformed=True)
    if list(shown.positions) != D:
        return Rejected("disclosed positions not in ascending order", malformed=True)
    if shown.cred0p.is_identity:
        return Rejected("cred0' is the identity")

    rhs = pk.K1 * shown.credp
    for j, a in shown.disclosed:
        rhs = rhs * pk.k2(j) ** a
    if not pairing_check([(shown.cred0p, rhs), (shown.cred1p.inverse(), pk.g2)]):
        return Rejected("first pairing equation fails")

    tar = disclosure_challenges(shown.disclosed, shown.cred0p, shown.cred1p, shown.credp)
    acc = G1.identity()
    for j in D:
        acc = acc * pk.k2t(N + 1 - j) ** tar[j]
    if not pairing_check([(shown.cred2p, pk.g2), (acc.inverse(), shown.credp)]):
        return Rejected("second pairing equation fails")
    return True


@dataclass
class LocalIssuance:
    secret: IssuerSecret
    pk: IssuerPublicKey
    shares: list
    x_all: list
    commitments: list
    partials: list
    credential: Credential


def issue_locally(params, attrs: Sequence[int], rng=None, rsu_ids=None, sk_sp=None, keys=None) -> LocalIssuance:
    """Run keygen, distribution and all N partial issuances in one process.

    ``keys`` reuses an existing (secret, pk, shares, x_all) instead of
    creating a fresh issuer.
    """
    rng = rng or random.SystemRandom()
    N = len(attrs)
    if keys is None:
        secret, pk = issuer_keygen(params, N, rng)
        rsu_ids = rsu_ids or [f"RSU{i}" for i in range(1, N + 1)]
        shares, xs = distribute_issue_key(secret, pk, rsu_ids, sk_sp or rng.randrange(1, R), rng)
    else:
        secret, pk, shares, xs = keys
    commitments = [issue_commit(rng)[1] for _ in range(N)]
    partials = [issue_partial(s, s.index, commitments, attrs[s.index - 1], xs) for s in shares]
    cred = aggregate_credential(partials, attrs)
    return LocalIssuance(secret, pk, shares, xs, commitments, partials, cred)
