"""The protocol phases as message flows over the world's transport.

Each phase function drives every participant in turn.  A participant only
sees the envelope bytes addressed to it, so anything a test corrupts in
transit (``world.transport.tamper``) reaches the receiver exactly as a
network attacker would leave it.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from ..credential import (
    Credential,
    IssuerPublicKey,
    IssuerShare,
    PartialCred,
    ShownCredential,
    aggregate_credential,
    apply_update,
    derive_show,
    distribute_issue_key,
    issue_commit,
    issue_partial,
    issuer_keygen,
    update_partial,
    verify_credential,
    verify_shown,
)
from ..crypto_core import ecc, wire
from ..crypto_core.groups import G1
from ..crypto_core.hashing import H2_REQ, H2_TRA, attr_to_scalar, hash_to_bits
from ..errors import (
    A2EError,
    AuthRejected,
    DecryptionError,
    IssuanceAborted,
    MalformedInput,
    ProtocolError,
    TraceError,
)
from ..otrs import MODE_IDS, MODE_KEYS, RingSig, match_matrix, ring_sign, ring_verify, verify
from .transport import Phase, decode_envelope
from .world import RSUState, UserState, World, add_user_keys

ISSUE_TAG = b"issue"
UPDATE_TAG = b"update"
TRACE_TAG = b"TRACE"


def _ms(t: float) -> bytes:
    return int(round(t * 1000)).to_bytes(8, "big", signed=True)


def _from_ms(b: bytes) -> float:
    if len(b) != 8:
        raise MalformedInput("timestamp must be 8 bytes")
    return int.from_bytes(b, "big", signed=True) / 1000


def _open(env: bytes, expect: Phase) -> bytes:
    phase, _, _, body = decode_envelope(env)
    if phase != expect:
        raise MalformedInput(f"expected a {expect.name} message, got {phase.name}")
    return body


# ------------------------------------------------------------------ signing

def _ring_mode(world):
    return MODE_IDS if world.config.ring_mode == "ids" else MODE_KEYS


def choose_ring(world: World, user: UserState, slot: int) -> List[bytes]:
    """M handles: the signer's key plus one random key of M-1 other users.

    Handles are returned in directory order, so the signer's position carries
    no information.
    """
    M = world.config.M
    others = [u for u in world.users if u != user.id]
    if len(others) < M - 1:
        raise ProtocolError(f"ring size {M} needs at least {M - 1} other registered users")
    ring = [world.directory.handle(user.index, slot)]
    for uid in world.rng.sample(others, M - 1):
        ring.append(world.rng.choice(world.directory.handles_of(uid)))
    return sorted(ring)


def user_sign(world: World, user: UserState, msg: bytes, phase: str) -> RingSig:
    """Ring-sign ``msg`` with a fresh one-time key from the user's pool."""
    slot = user.fresh_slot()
    if slot is None:
        add_user_keys(world, user, world.config.pool_size)
        slot = user.fresh_slot()
    user.used.add(slot)
    handles = choose_ring(world, user, slot)
    own = world.directory.handle(user.index, slot)
    ring = [world.directory.resolve(h) for h in handles]
    sig = ring_sign(ring, msg, user.pool[slot], handles.index(own), world.rng, handles)
    user.history.append((phase, slot, msg))
    return sig


def sig_bytes(world: World, sig: RingSig) -> bytes:
    return sig.to_bytes(_ring_mode(world))


def parse_sig(world: World, data: bytes) -> RingSig:
    return RingSig.from_bytes(data, world.config.lam, resolve=world.directory.resolve)


def _ring_handles(world, sig: RingSig):
    if sig.handles is not None:
        return list(sig.handles)
    try:
        return [world.directory.handle_of_key(pk) for pk in sig.ring]
    except KeyError as exc:
        raise TraceError("ring contains an unregistered key") from exc


# ---------------------------------------------------------- key distribution

def run_issue_key_distribution(world: World):
    """SP creates the issuer key and hands each RSU its encrypted share."""
    sp = world.sp
    rsus = world.rsu_list()
    N = world.config.N
    if len(rsus) != N:
        raise ProtocolError(f"need {N} registered RSUs, have {len(rsus)}")
    envelopes = []
    with world.timer("keydist", sp):
        secret, pk = issuer_keygen(world.params, N, world.rng)
        shares, xs = distribute_issue_key(secret, pk, [r.id for r in rsus], sp.keys.sk, world.rng,
                                          threshold=world.config.threshold)
        public = [pk.to_bytes(), wire.pack([x.to_bytes(32, "big") for x in xs])]
        for rsu, share in zip(rsus, shares):
            ct = ecc.pk_encrypt(rsu.keys.pk, share.payload(), world.rng)
            envelopes.append((rsu, world.transport.send(Phase.KEYDIST, sp, rsu, wire.pack([ct] + public))))
    sp.issuer_secret = secret
    world.pk_issuer = pk
    world.x_all = tuple(xs)
    for rsu, env in envelopes:
        with world.timer("keydist", rsu):
            ct, pk_b, xs_b = wire.unpack(_open(env, Phase.KEYDIST), 3)
            rsu.pk_issuer = IssuerPublicKey.from_bytes(pk_b, world.params)
            rsu.x_all = tuple(int.from_bytes(x, "big") for x in wire.unpack(xs_b))
            rsu.share = IssuerShare.from_payload(ecc.pk_decrypt(rsu.keys.sk, ct), rsu.pk_issuer)


# -------------------------------------------------------------------- issue

def _issue_msg(session: bytes, pos: int, attr: str) -> bytes:
    return wire.pack([ISSUE_TAG, session, wire.pack_int(pos, 2), attr.encode("utf-8")])


def _rsu_accept_issue_request(world, rsu: RSUState, env: bytes):
    """Decrypt and check one attribute request; returns (session, attr)."""
    try:
        sig = parse_sig(world, ecc.pk_decrypt(rsu.keys.sk, _open(env, Phase.ISSUE)))
        tag, session, pos_b, attr_b = wire.unpack(sig.msg, 4)
        attr = wire.unpack_str(attr_b)
    except (A2EError, ValueError) as exc:
        raise IssuanceAborted(f"{rsu.id}: unreadable request ({exc})") from exc
    if tag != ISSUE_TAG or wire.unpack_int(pos_b, 2) != rsu.share.index:
        raise IssuanceAborted(f"{rsu.id}: request is not for this position")
    verdict = ring_verify(sig.ring, sig.msg, sig)
    if not verdict:
        raise IssuanceAborted(f"{rsu.id}: ring signature rejected ({verdict.reason})")
    rsu.observed.append(("issue", sig.handles, attr))
    return session, attr


def run_issue_phase(world: World, user_id: str, attrs: Sequence[str]) -> Credential:
    user = world.users[user_id]
    N = world.config.N
    if world.pk_issuer is None:
        raise ProtocolError("issue keys have not been distributed")
    if len(attrs) != N:
        raise ProtocolError(f"need exactly {N} attributes")
    rsus = [world.rsu_for_position(j) for j in range(1, N + 1)]

    requests = []
    with world.timer("issue", user):
        session = world.rng.randbytes(16)
        for j, (rsu, attr) in enumerate(zip(rsus, attrs), start=1):
            sig = user_sign(world, user, _issue_msg(session, j, attr), "issue")
            ct = ecc.pk_encrypt(rsu.keys.pk, sig_bytes(world, sig), world.rng)
            requests.append(world.transport.send(Phase.ISSUE, user, rsu, ct))

    accepted = {}
    for rsu, env in zip(rsus, requests):
        with world.timer("issue", rsu):
            accepted[rsu.id] = _rsu_accept_issue_request(world, rsu, env)
    if len({s for s, _ in accepted.values()}) != 1:
        raise IssuanceAborted("RSUs disagree on the issuance session")

    # commitment round: every RSU sends V to each peer
    inbox = {rsu.id: {} for rsu in rsus}
    for rsu in rsus:
        with world.timer("issue", rsu):
            v, V = issue_commit(world.rng)
            inbox[rsu.id][rsu.index] = V
            body = wire.pack([session, V.to_bytes()])
            outgoing = [(peer, world.transport.send(Phase.ISSUE, rsu, peer, body))
                        for peer in rsus if peer is not rsu]
        for peer, env in outgoing:
            with world.timer("issue", peer):
                s, V_b = wire.unpack(_open(env, Phase.ISSUE), 2)
                if s != session:
                    raise IssuanceAborted(f"{peer.id}: commitment for another session")
                inbox[peer.id][rsu.index] = G1.from_bytes(V_b)

    replies = []
    for rsu in rsus:
        with world.timer("issue", rsu):
            commitments = [inbox[rsu.id][r.index] for r in rsus]
            attr = accepted[rsu.id][1]
            partial = issue_partial(rsu.share, rsu.share.index, commitments, attr_to_scalar(attr), rsu.x_all)
            replies.append(world.transport.send(Phase.ISSUE, rsu, user, partial.to_bytes()))

    with world.timer("issue", user):
        try:
            partials = [PartialCred.from_bytes(_open(env, Phase.ISSUE)) for env in replies]
            cred = aggregate_credential(partials, [attr_to_scalar(a) for a in attrs])
        except (A2EError, ValueError) as exc:
            raise IssuanceAborted(f"{user.id}: bad partial credentials ({exc})") from exc
        verdict = verify_credential(world.pk_issuer, cred)
        if not verdict:
            raise IssuanceAborted(f"{user.id}: {verdict.reason}")
    user.credential = cred
    user.attrs = list(attrs)
    return cred


# --------------------------------------------------------------------- auth

@dataclass
class TraceEvidence:
    shown: ShownCredential
    sig: RingSig


@dataclass
class AuthResult:
    dt_id: str
    rsu_id: str
    rsu_signature: bytes
    req: bytes
    T: float
    evidence: TraceEvidence


def compute_req(world, shown_bytes: bytes, T: float) -> bytes:
    """req = H2(shown credential, T)."""
    return hash_to_bits(wire.pack([shown_bytes, _ms(T)]), world.config.L, H2_REQ)


def check_freshness(rsu: RSUState, req: bytes, T: float, now: float, window: float = 60.0) -> bool:
    """Accept a request at most once and only inside the time window.

    Accepted requests are remembered until T + window, after which they
    can no longer pass the time test anyway and are evicted.
    """
    for old in [r for r, expiry in rsu.seen.items() if expiry < now]:
        del rsu.seen[old]
    if abs(now - T) > window or req in rsu.seen:
        return False
    rsu.seen[req] = T + window
    return True


def build_auth_request(world: World, user_id: str, rsu_id: str, D: Sequence[int], T: Optional[float] = None):
    """User side of the request; returns (envelope, context for the reply)."""
    user = world.users[user_id]
    rsu = world.rsus[rsu_id]
    if user.credential is None:
        raise ProtocolError(f"{user_id} holds no credential")
    T = world.now if T is None else T
    with world.timer("auth", user):
        with world.timer("derive", user):
            shown = derive_show(user.credential, D, world.pk_issuer, world.rng)
        shown_b = shown.to_bytes()
        req = compute_req(world, shown_b, T)
        sig = user_sign(world, user, req, "auth")
        plain_attrs = wire.pack([wire.pack([wire.pack_int(j, 2), user.attrs[j - 1].encode("utf-8")])
                                 for j in shown.positions])
        body = wire.pack([plain_attrs, shown_b, sig_bytes(world, sig), _ms(T)])
        env = world.transport.send(Phase.AUTH, user, rsu, ecc.pk_encrypt(rsu.keys.pk, body, world.rng))
    return env, (req, T, TraceEvidence(shown, sig))


def rsu_handle_auth(world: World, rsu_id: str, env: bytes, user_id: str) -> bytes:
    """RSU side: authenticate, assign a DT, answer with a signed assignment.

    Raises AuthRejected with the reason on any failure.
    """
    rsu = world.rsus[rsu_id]
    user = world.users[user_id]  # return address only; the request itself is anonymous
    window = world.config.freshness_window
    with world.timer("auth", rsu):
        try:
            body = ecc.pk_decrypt(rsu.keys.sk, _open(env, Phase.AUTH))
            attrs_b, shown_b, sig_b, T_b = wire.unpack(body, 4)
            T = _from_ms(T_b)
        except (A2EError, ValueError) as exc:
            raise AuthRejected(f"unreadable request ({exc})", rsu_id) from exc
        # cheap checks first: a replay is refused before any pairing work
        if abs(world.now - T) > window:
            raise AuthRejected("stale timestamp", rsu_id)
        req = compute_req(world, shown_b, T)
        if req in rsu.seen and rsu.seen[req] >= world.now:
            raise AuthRejected("replayed request", rsu_id)
        try:
            sig = parse_sig(world, sig_b)
            shown = ShownCredential.from_bytes(shown_b)
            plain = {}
            for item in wire.unpack(attrs_b):
                j_b, a_b = wire.unpack(item, 2)
                plain[wire.unpack_int(j_b, 2)] = wire.unpack_str(a_b)
        except (A2EError, ValueError) as exc:
            raise AuthRejected(f"malformed request ({exc})", rsu_id) from exc
        if sig.msg != req:
            raise AuthRejected("ring signature is over a different request", rsu_id)
        verdict = ring_verify(sig.ring, sig.msg, sig)
        if not verdict:
            raise AuthRejected(f"ring signature rejected ({verdict.reason})", rsu_id)
        if sorted(plain) != list(shown.positions) or any(
                attr_to_scalar(plain[j]) != a for j, a in shown.disclosed):
            raise AuthRejected("disclosed attributes do not match the credential", rsu_id)
        verdict = verify_shown(rsu.pk_issuer, shown)
        if not verdict:
            raise AuthRejected(f"credential rejected ({verdict.reason})", rsu_id)
        if not check_freshness(rsu, req, T, world.now, window):
            raise AuthRejected("replayed request", rsu_id)
        if not rsu.dts:
            raise AuthRejected("no DT available", rsu_id)
        dt_id = rsu.dts[rsu.next_dt % len(rsu.dts)]
        rsu.next_dt += 1
        rsu.observed.append(("auth", shown_b, sig.handles, dict(plain)))
        dt = world.dts[dt_id]
        notice = ecc.pk_encrypt(dt.keys.pk, wire.pack([req, attrs_b]), world.rng)
        to_dt = world.transport.send(Phase.AUTH, rsu, dt, notice)
        rsu_sig = ecc.ec_sign(rsu.keys.sk, wire.pack([req, dt_id.encode()]))
        reply = world.transport.send(Phase.AUTH, rsu, user, wire.pack([dt_id.encode(), rsu_sig]))
    with world.timer("auth", dt):
        req_dt, _ = wire.unpack(ecc.pk_decrypt(dt.keys.sk, _open(to_dt, Phase.AUTH)), 2)
        dt.assignments.append(req_dt)
    return reply


def user_finish_auth(world: World, user_id: str, rsu_id: str, reply: bytes, context) -> AuthResult:
    req, T, evidence = context
    user = world.users[user_id]
    with world.timer("auth", user):
        try:
            dt_b, rsu_sig = wire.unpack(_open(reply, Phase.AUTH), 2)
        except MalformedInput as exc:
            raise ProtocolError(f"unreadable RSU reply ({exc})") from exc
        if not ecc.ec_verify(world.rsus[rsu_id].keys.pk, wire.pack([req, dt_b]), rsu_sig):
            raise ProtocolError("RSU signature on the DT assignment does not verify")
    return AuthResult(dt_b.decode(), rsu_id, rsu_sig, req, T, evidence)


def run_auth_phase(world: World, user_id: str, rsu_id: str, D: Sequence[int], T: Optional[float] = None) -> AuthResult:
    env, context = build_auth_request(world, user_id, rsu_id, D, T)
    reply = rsu_handle_auth(world, rsu_id, env, user_id)
    return user_finish_auth(world, user_id, rsu_id, reply, context)


# -------------------------------------------------------------------- trace

@dataclass
class TraceResult:
    user_id: str
    contacted: List[str]
    by_policy: bool = False  # identified for not answering, not by the XOR test


def compute_tra(world, req: bytes, T_trace: float) -> bytes:
    return hash_to_bits(wire.pack([TRACE_TAG, req, _ms(T_trace)]), world.config.L, H2_TRA)


def _user_answer_trace(world, user: UserState, env: bytes, position: int) -> bytes:
    tra, handles_b = wire.unpack(_open(env, Phase.TRACE), 2)
    handles = wire.unpack(handles_b)
    member, slot = world.directory.split(handles[position])
    if member != user.index:
        raise ProtocolError(f"{user.id} was asked to answer for a key it does not own")
    ring = [world.directory.resolve(h) for h in handles]
    sig = ring_sign(ring, tra, user.pool[slot], position, world.rng, handles)
    user.used.add(slot)
    user.history.append(("trace", slot, tra))
    return sig_bytes(world, sig)


def run_trace_phase(world: World, evidence: TraceEvidence) -> TraceResult:
    """Ask every ring member to sign a trace challenge and XOR-match the answers."""
    sp = world.sp
    with world.timer("trace", sp):
        evid = evidence.sig
        if not verify(evid):
            raise TraceError("evidence signature does not verify; nothing to trace")
        handles = _ring_handles(world, evid)
        tra = compute_tra(world, evid.msg, world.now)
        body = wire.pack([tra, wire.pack(handles)])
        outgoing = []
        for pos, h in enumerate(handles):
            member = world.users[world.directory.owner(h)]
            outgoing.append((pos, member, world.transport.send(Phase.TRACE, sp, member, body)))

    contacted = [m.id for _, m, _ in outgoing]
    matches, silent = [], []
    for pos, member, env in outgoing:
        if member.id in world.unresponsive:
            silent.append(member.id)
            continue
        with world.timer("trace", member):
            answer = world.transport.send(Phase.TRACE, member, sp, _user_answer_trace(world, member, env, pos))
        with world.timer("trace", sp):
            try:
                sig = parse_sig(world, _open(answer, Phase.TRACE))
            except A2EError:
                silent.append(member.id)
                continue
            same_ring = [pk.fingerprint for pk in sig.ring] == [pk.fingerprint for pk in evid.ring]
            if sig.msg != tra or not same_ring or not verify(sig):
                silent.append(member.id)
                continue
            if match_matrix(evid, sig)[pos].any():
                matches.append(member.id)

    if len(matches) == 1:
        return TraceResult(matches[0], contacted)
    if len(matches) > 1:
        raise TraceError(f"several ring members match: {matches}")
    if silent:
        return TraceResult(silent[0], contacted, by_policy=True)
    raise TraceError("no ring member matches the evidence")


# ------------------------------------------------------------------- update

def _update_msg(pos: int, attr: str, cred0: G1) -> bytes:
    return wire.pack([UPDATE_TAG, wire.pack_int(pos, 2), attr.encode("utf-8"), cred0.to_bytes()])


def run_update_phase(world: World, user_id: str, updates: Sequence[Tuple[int, str]]) -> Credential:
    user = world.users[user_id]
    cred = user.credential
    if cred is None:
        raise ProtocolError(f"{user_id} holds no credential")
    positions = [p for p, _ in updates]
    if len(set(positions)) != len(positions) or any(not 1 <= p <= cred.N for p in positions):
        raise ProtocolError("update positions must be distinct and within 1..N")
    if not updates:
        return cred

    sent = []
    with world.timer("update", user):
        for pos, attr in updates:
            rsu = world.rsu_for_position(pos)
            sig = user_sign(world, user, _update_msg(pos, attr, cred.cred0), "update")
            body = wire.pack([sig_bytes(world, sig), cred.cred0.to_bytes()])
            sent.append((pos, attr, rsu, world.transport.send(
                Phase.UPDATE, user, rsu, ecc.pk_encrypt(rsu.keys.pk, body, world.rng))))

    replies = []
    for pos, attr, rsu, env in sent:
        with world.timer("update", rsu):
            try:
                sig_b, cred0_b = wire.unpack(ecc.pk_decrypt(rsu.keys.sk, _open(env, Phase.UPDATE)), 2)
                sig = parse_sig(world, sig_b)
                cred0 = G1.from_bytes(cred0_b)
                tag, pos_b, attr_b, c0_b = wire.unpack(sig.msg, 4)
                new_attr = wire.unpack_str(attr_b)
            except (A2EError, ValueError) as exc:
                raise ProtocolError(f"{rsu.id}: unreadable update request ({exc})") from exc
            if tag != UPDATE_TAG or wire.unpack_int(pos_b, 2) != rsu.share.index or c0_b != cred0_b:
                raise ProtocolError(f"{rsu.id}: update request does not match this RSU")
            verdict = ring_verify(sig.ring, sig.msg, sig)
            if not verdict:
                raise ProtocolError(f"{rsu.id}: ring signature rejected ({verdict.reason})")
            cred2 = update_partial(rsu.share, rsu.share.index, cred0, attr_to_scalar(new_attr))
            replies.append((pos, attr, world.transport.send(
                Phase.UPDATE, rsu, user, wire.pack([wire.pack_int(pos, 2), cred2.to_bytes()]))))

    with world.timer("update", user):
        replaced = []
        for pos, attr, env in replies:
            try:
                pos_b, cred2_b = wire.unpack(_open(env, Phase.UPDATE), 2)
                cred2 = G1.from_bytes(cred2_b)
            except MalformedInput as exc:
                raise ProtocolError(f"unreadable update reply ({exc})") from exc
            if wire.unpack_int(pos_b, 2) != pos:
                raise ProtocolError("update reply for the wrong position")
            replaced.append((pos, cred2, attr_to_scalar(attr)))
        cred = apply_update(cred, replaced)
        verdict = verify_credential(world.pk_issuer, cred)
        if not verdict:
            raise ProtocolError(f"updated credential rejected ({verdict.reason})")
    user.credential = cred
    for pos, attr in updates:
        user.attrs[pos - 1] = attr
    return cred
