"""The nine acceptance checks, runnable from ``a2e verify`` and from pytest.

Every check returns a :class:`CriterionResult`; none of them raises on a
failed property, so one broken component does not hide the others.
"""

import contextlib
import io
import itertools
import os
import random
import statistics
import tempfile
import time
import traceback
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np

from . import shamir
from .bench import gc_paused
from .credential import (
    aggregate_credential,
    derive_show,
    expected_cred1,
    issue_locally,
    issue_partial,
    verify_shown,
)
from .crypto_core import ecc, wire
from .crypto_core.groups import G1, R
from .crypto_core.hashing import attr_to_scalar
from .crypto_core.params import setup
from .errors import A2EError, AuthRejected
from .otrs import (
    MODE_IDS,
    MODE_KEYS,
    RingSig,
    gen_one_time_key,
    ring_sign,
    ring_verify,
    size_model_bits,
    trace_match,
)
from .protocol import (
    WorldConfig,
    add_user_keys,
    build_auth_request,
    build_world,
    rsu_handle_auth,
    run_auth_phase,
    run_issue_phase,
    run_trace_phase,
    run_update_phase,
)
from .protocol.phases import _ms, sig_bytes
from .protocol.transport import Phase


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number}. {self.title}: {self.detail} ({self.seconds:.1f}s)"


CHECKS: Dict[int, Callable] = {}


def criterion(number, title):
    def wrap(fn):
        fn.number, fn.title = number, title
        CHECKS[number] = fn
        return fn
    return wrap


def _rng(seed, number):
    return random.Random(seed * 1000 + number)


# --------------------------------------------------------------------- 1

@criterion(1, "every disclosure set verifies at N=5")
def check_all_disclosure_sets(seed=0):
    rng = _rng(seed, 1)
    params = setup(n_max=5)
    attrs = [attr_to_scalar(f"attr{j}") for j in range(1, 6)]
    iss = issue_locally(params, attrs, rng)
    failures = []
    sets = [D for k in range(1, 6) for D in itertools.combinations(range(1, 6), k)]
    for D in sets:
        verdict = verify_shown(iss.pk, derive_show(iss.credential, D, iss.pk, rng))
        if not verdict:
            failures.append((D, verdict.reason))
    ok = not failures and len(sets) == 31
    return ok, f"{len(sets) - len(failures)}/{len(sets)} sets verify" + (f"; first failure {failures[0]}" if failures else "")


# --------------------------------------------------------------------- 2

@criterion(2, "aggregated cred1 matches the secret-key oracle")
def check_oracle_identity(seed=0, trials=50):
    rng = _rng(seed, 2)
    params = setup(n_max=5)
    bad = 0
    for _ in range(trials):
        N = rng.randint(1, 5)
        attrs = [rng.randrange(R) for _ in range(N)]
        iss = issue_locally(params, attrs, rng)
        k1 = shamir.reconstruct([shamir.Share(s.x, s.fx) for s in iss.shares])
        cred = iss.credential
        if k1 != iss.secret.k1 or cred.cred1 != expected_cred1(iss.secret, cred.cred0, attrs):
            bad += 1
    return bad == 0, f"{bad} failures over {trials} issuances (N drawn from 1..5)"


# --------------------------------------------------------------------- 3

def _flip(data: bytes, bit: int) -> bytes:
    b = bytearray(data)
    b[bit // 8] ^= 1 << (bit % 8)
    return bytes(b)


@criterion(3, "ring signature completeness, mutation rejection, size model")
def check_ring_signatures(seed=0, mutations=100):
    rng = _rng(seed, 3)
    L, lam = 256, 128
    keys = [gen_one_time_key(L=L, lam=lam, rng=rng) for _ in range(100)]
    handles = [i.to_bytes(6, "big") for i in range(len(keys))]
    by_handle = dict(zip(handles, (k.pk for k in keys)))
    notes = []

    complete = True
    for M in (1, 2, 10, 100):
        idx = sorted(rng.sample(range(len(keys)), M))
        ring = [keys[i].pk for i in idx]
        me = rng.randrange(M)
        sig = ring_sign(ring, b"complete", keys[idx[me]], me, rng, [handles[i] for i in idx])
        for mode in (MODE_KEYS, MODE_IDS):
            back = RingSig.from_bytes(sig.to_bytes(mode), lam, by_handle.get)
            complete &= bool(ring_verify(ring, b"complete", back))
    notes.append("complete at M=1,2,10,100" if complete else "completeness FAILED")

    # mutations hit the str matrix, the seed matrix or the message
    idx = sorted(rng.sample(range(len(keys)), 10))
    ring = [keys[i].pk for i in idx]
    sig = ring_sign(ring, b"mutate me", keys[idx[3]], 3, rng)
    blob = sig.to_bytes(MODE_KEYS)
    fields = wire.unpack(blob, 7)
    starts = list(itertools.accumulate([4 + len(f) for f in fields], initial=0))
    targets = [4, 5, 6]
    accepted = 0
    for t in range(mutations):
        f = targets[t % 3]
        bit = 8 * (starts[f] + 4) + rng.randrange(8 * len(fields[f]))
        try:
            forged = RingSig.from_bytes(_flip(blob, bit), lam)
        except A2EError:
            continue
        if ring_verify(ring, b"mutate me", forged):
            accepted += 1
    notes.append(f"{mutations - accepted}/{mutations} mutations rejected")

    M = 100
    idx = list(range(M))
    sig = ring_sign([keys[i].pk for i in idx], b"size", keys[0], 0, rng, [handles[i] for i in idx])
    model = size_model_bits(M, L, lam) / 8
    ids = len(sig.to_bytes(MODE_IDS))
    full = len(sig.to_bytes(MODE_KEYS))
    dev = abs(ids - model) / model
    notes.append(f"ids-mode size {ids} B vs model {model:.0f} B ({100 * dev:.2f}%); keys mode {full} B")
    return complete and accepted == 0 and dev <= 0.05, "; ".join(notes)


# --------------------------------------------------------------------- 4

@criterion(4, "trace identifies the double signer and contacts exactly M users")
def check_trace(seed=0, trials=1000, M=100, population=1000):
    rng = _rng(seed, 4)
    L, lam = 256, 128
    keys = [gen_one_time_key(L=L, lam=lam, rng=rng) for _ in range(3 * M)]
    found = false_pos = 0
    for t in range(trials):
        idx = sorted(rng.sample(range(len(keys)), M))
        ring = [keys[i].pk for i in idx]
        u, v = rng.sample(range(M), 2)
        s1 = ring_sign(ring, b"first %d" % t, keys[idx[u]], u, rng)
        s2 = ring_sign(ring, b"second %d" % t, keys[idx[u]], u, rng)
        s3 = ring_sign(ring, b"other %d" % t, keys[idx[v]], v, rng)
        found += trace_match(s1, s2) == u
        false_pos += trace_match(s1, s3) is not None

    # protocol level: one malicious showing among `population` registered users
    world = build_world(WorldConfig(N=5, M=M, pool_size=1), seed=seed, users=population)
    add_user_keys(world, world.users["U1"], 8)
    run_issue_phase(world, "U1", [f"attr{j}" for j in range(1, 6)])
    evidence = run_auth_phase(world, "U1", "RSU1", [1, 2, 3]).evidence
    mark = world.transport.mark()
    result = run_trace_phase(world, evidence)
    contacted = {e.dst for e in world.transport.since(mark) if e.src == "SP" and e.phase == "trace"}
    ok = (found == trials and false_pos == 0 and result.user_id == "U1"
          and not result.by_policy and len(contacted) == M)
    return ok, (f"signer found {found}/{trials}, false positives {false_pos}/{trials}; "
                f"A={population}: contacted {len(contacted)} users, traced {result.user_id}")


# --------------------------------------------------------------------- 5

@criterion(5, "U=2 update touches 2 RSUs and equals fresh issuance")
def check_update(seed=0, trials=20, U=2):
    rng = _rng(seed, 5)
    N = 5
    world = build_world(WorldConfig(N=N, M=10, pool_size=16), seed=seed, users=2 * trials + 10)
    good = 0
    touched = []
    for t in range(trials):
        uid = f"U{t + 1}"
        attrs = [f"a{j}.{rng.randrange(10**6)}" for j in range(1, N + 1)]
        old = run_issue_phase(world, uid, attrs)
        positions = sorted(rng.sample(range(1, N + 1), U))
        mark = world.transport.mark()
        new = run_update_phase(world, uid, [(p, f"new{p}.{rng.randrange(10**6)}") for p in positions])
        rsus = {e.src for e in world.transport.since(mark) if e.src.startswith("RSU")}
        rsus |= {e.dst for e in world.transport.since(mark) if e.dst.startswith("RSU")}
        touched.append(len(rsus))

        # fresh issuance over the updated attributes with the same cred0
        scalars = [attr_to_scalar(a) for a in world.users[uid].attrs]
        commitments = [old.cred0] + [G1.identity()] * (N - 1)
        partials = [issue_partial(r.share, r.share.index, commitments, scalars[r.share.index - 1], r.x_all)
                    for r in world.rsu_list()]
        fresh = aggregate_credential(partials, scalars)
        oracle = expected_cred1(world.sp.issuer_secret, old.cred0, scalars)
        D = sorted(rng.sample(range(1, N + 1), rng.randint(1, N)))
        shows = verify_shown(world.pk_issuer, derive_show(new, D, world.pk_issuer, rng))
        if (len(rsus) == U and new.cred0 == fresh.cred0 and new.cred1 == fresh.cred1 == oracle
                and new.cred1 != old.cred1 and shows):
            good += 1
    return good == trials, f"{good}/{trials} trials; RSUs touched per update {sorted(set(touched))}"


# --------------------------------------------------------------------- 6

def _interleaved(world, points, run_once, reps, rng):
    """Repeat every point ``reps`` times in a shuffled order per round."""
    samples = {p: [] for p in points}
    for _ in range(reps):
        order = list(points)
        rng.shuffle(order)
        for p in order:
            world.reset_meters()
            with gc_paused():
                run_once(p)
            world.advance(0.01)
            samples[p].append(dict(world.compute))
    return samples


def _median(rows, key):
    return statistics.median(r.get(key, 0.0) for r in rows)


@criterion(6, "cost shapes over N' and U")
def check_scaling(seed=0, reps=120, M=100):
    rng = _rng(seed, 6)
    N = 5
    world = build_world(WorldConfig(N=N, M=M, pool_size=2), seed=seed, users=M)
    user = world.users["U1"]
    add_user_keys(world, user, reps * (N + 15) + 10)
    run_issue_phase(world, "U1", [f"attr{j}" for j in range(1, N + 1)])
    for Np in range(1, N + 1):  # warm every table before timing
        run_auth_phase(world, "U1", "RSU1", list(range(1, Np + 1)))

    auth = _interleaved(world, range(1, N + 1),
                        lambda Np: run_auth_phase(world, "U1", "RSU1", list(range(1, Np + 1))), reps, rng)
    rsu_auth = [_median(auth[Np], ("auth", "RSU1")) for Np in range(1, N + 1)]
    derive = [_median(auth[Np], ("derive", "U1")) for Np in range(1, N + 1)]
    auth_spread = (max(rsu_auth) - min(rsu_auth)) / min(rsu_auth)
    monotone = all(b > a for a, b in zip(derive, derive[1:]))

    counter = itertools.count()

    def update(U):
        k = next(counter)
        run_update_phase(world, "U1", [(j, f"u{j}.{k}") for j in range(1, U + 1)])

    upd = _interleaved(world, range(1, N + 1), update, reps, rng)
    per_rsu = []
    for U in range(1, N + 1):
        per_rep = [statistics.mean(v for (ph, eid), v in row.items() if ph == "update" and eid.startswith("RSU"))
                   for row in upd[U]]
        per_rsu.append(statistics.median(per_rep))
    upd_spread = (max(per_rsu) - min(per_rsu)) / min(per_rsu)

    ms = lambda xs: "[" + ", ".join(f"{1e3 * x:.1f}" for x in xs) + "] ms"
    ok = auth_spread < 0.10 and monotone and upd_spread < 0.10
    return ok, (f"RSU auth {ms(rsu_auth)} spread {100 * auth_spread:.1f}%; "
                f"User derive {ms(derive)} {'increasing' if monotone else 'NOT increasing'}; "
                f"per-RSU update {ms(per_rsu)} spread {100 * upd_spread:.1f}% (medians of {reps})")


# --------------------------------------------------------------------- 7

def _forged_request(world, rsu_id, shown_b, req, T, plain_attrs, ring, rng, adjust):
    """A ring signature over ``req`` made without any member's seeds."""
    M, L = len(ring), ring[0].L
    strs = np.unpackbits(np.frombuffer(rng.randbytes(M * L // 8), dtype=np.uint8)).reshape(M, L)
    seeds = np.frombuffer(rng.randbytes(M * L * 16), dtype=np.uint8).reshape(M, L, 16)
    if adjust:
        # make the str rows XOR to the tar that the current rows give
        from .otrs import _ring_matrix, _tar
        from .crypto_core.hashing import prg_expand_many
        r = prg_expand_many(seeds) ^ (_ring_matrix(ring) * strs[:, :, None])
        j = rng.randrange(M)
        strs[j] ^= np.bitwise_xor.reduce(strs, axis=0) ^ _tar(ring, r, req, L)
    handles = [world.directory.handle_of_key(pk) for pk in ring]
    sig = RingSig(ring, strs, seeds, req, handles)
    body = wire.pack([plain_attrs, shown_b, sig_bytes(world, sig), _ms(T)])
    rsu = world.rsus[rsu_id]
    return world.transport.send(Phase.AUTH, world.users["U1"], rsu, ecc.pk_encrypt(rsu.keys.pk, body, rng))


@criterion(7, "replays and seedless forgeries are refused")
def check_replay_and_forgery(seed=0, replays=100, forgeries=1000, M=10):
    rng = _rng(seed, 7)
    N = 5
    world = build_world(WorldConfig(N=N, M=M, pool_size=2), seed=seed, users=M + 5)
    add_user_keys(world, world.users["U1"], replays + 10)
    run_issue_phase(world, "U1", [f"attr{j}" for j in range(1, N + 1)])

    refused = 0
    for i in range(replays):
        rsu_id = f"RSU{1 + i % N}"
        D = sorted(rng.sample(range(1, N + 1), rng.randint(1, N)))
        env, ctx = build_auth_request(world, "U1", rsu_id, D)
        rsu_handle_auth(world, rsu_id, env, "U1")
        world.advance(rng.uniform(0, world.config.freshness_window / 2))
        try:
            rsu_handle_auth(world, rsu_id, env, "U1")
        except AuthRejected as exc:
            refused += exc.reason == "replayed request"
        world.advance(0.5)

    # a curious RSU has seen a showing and tries to reuse it
    world.advance(5)
    env, (req, T, evidence) = build_auth_request(world, "U1", "RSU1", [1, 2])
    shown_b = evidence.shown.to_bytes()
    plain = wire.pack([wire.pack([wire.pack_int(j, 2), world.users["U1"].attrs[j - 1].encode()]) for j in (1, 2)])
    others = [u for u in world.users if u != "U1"]
    accepted = 0
    for k in range(forgeries):
        ring = [world.directory.resolve(rng.choice(world.directory.handles_of(u)))
                for u in rng.sample(others, M)]
        forged = _forged_request(world, "RSU1", shown_b, req, T, plain, ring, rng, adjust=k % 2 == 1)
        try:
            rsu_handle_auth(world, "RSU1", forged, "U1")
            accepted += 1
        except AuthRejected:
            pass
    # the genuine request is still fresh and goes through afterwards
    genuine = bool(rsu_handle_auth(world, "RSU1", env, "U1"))
    ok = refused == replays and accepted == 0 and genuine
    return ok, (f"replays refused {refused}/{replays}; forgeries accepted {accepted}/{forgeries} at M={M}; "
                f"genuine request {'accepted' if genuine else 'REFUSED'} afterwards")


# --------------------------------------------------------------------- 8

@criterion(8, "Shamir reconstruction and below-threshold failure")
def check_shamir(seed=0, trials=100):
    rng = _rng(seed, 8)
    notes, ok = [], True
    for n, t in ((5, 5), (5, 3)):
        secret = rng.randrange(R)
        xs = rng.sample(range(1, 10**9), n)
        shares = shamir.share(secret, xs, t, rng=rng)
        subsets = [c for k in range(t, n + 1) for c in itertools.combinations(shares, k)]
        good = sum(shamir.reconstruct(c) == secret for c in subsets)
        ok &= good == len(subsets)
        notes.append(f"(n={n}, t={t}) {good}/{len(subsets)} qualifying subsets")
    wrong = 0
    for _ in range(trials):
        n = 5
        t = rng.randint(2, n)
        secret = rng.randrange(R)
        shares = shamir.share(secret, rng.sample(range(1, 10**9), n), t, rng=rng)
        subset = rng.sample(shares, rng.randint(1, t - 1))
        wrong += shamir.reconstruct(subset) != secret
    ok &= wrong == trials
    notes.append(f"below threshold wrong {wrong}/{trials}")
    return ok, "; ".join(notes)


# --------------------------------------------------------------------- 9

@criterion(9, "two demo runs with seed 7 give identical transcripts")
def check_determinism(seed=0):
    from .cli import main

    with tempfile.TemporaryDirectory() as tmp:
        paths = [os.path.join(tmp, f"run{i}.jsonl") for i in range(2)]
        codes = []
        for p in paths:
            with contextlib.redirect_stdout(io.StringIO()):
                codes.append(main(["demo", "--seed", "7", "--out", p]))
        a, b = (open(p, "rb").read() for p in paths)
    ok = codes == [0, 0] and a == b and len(a) > 0
    lines = a.count(b"\n")
    return ok, f"exit codes {codes}; transcripts {'identical' if a == b else 'DIFFER'} ({len(a)} bytes, {lines} messages)"


# ------------------------------------------------------------------ driver

def run_one(number, seed=0) -> CriterionResult:
    fn = CHECKS[number]
    t0 = time.perf_counter()
    try:
        passed, detail = fn(seed=seed)
    except Exception as exc:  # a crash is a failed criterion, with the cause
        passed, detail = False, f"raised {type(exc).__name__}: {exc}\n{traceback.format_exc()}"
    return CriterionResult(number, fn.title, bool(passed), detail, time.perf_counter() - t0)


def run_all(only: Optional[List[int]] = None, seed=0, echo=None) -> List[CriterionResult]:
    numbers = sorted(CHECKS) if not only else list(only)
    unknown = [n for n in numbers if n not in CHECKS]
    if unknown:
        raise ValueError(f"no criterion numbered {unknown}")
    results = []
    for n in numbers:
        res = run_one(n, seed)
        results.append(res)
        if echo:
            echo(res)
    return results
