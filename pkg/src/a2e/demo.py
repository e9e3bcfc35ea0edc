"""One complete story through all phases, with deterministic output."""

import hashlib
from collections import Counter

from .errors import AuthRejected
from .protocol import (
    WorldConfig,
    build_world,
    rsu_handle_auth,
    build_auth_request,
    run_auth_phase,
    run_issue_phase,
    run_trace_phase,
    run_update_phase,
    user_finish_auth,
)

ATTRS = ["age:adult", "licence:B", "lang:en", "pay:card", "rating:5", "seat:front", "pet:no", "region:north"]


def run_demo(seed=7, N=5, Nprime=3, M=100, U=2, ring_mode="ids", users=None, say=print):
    """Setup, registration, key distribution, issue, auth (plus a replay),
    trace and update.  Returns the world; ``say`` receives the narration."""
    if not 1 <= Nprime <= N or not 0 <= U <= N:
        raise ValueError("need 1 <= N' <= N and 0 <= U <= N")
    if N > len(ATTRS):
        raise ValueError(f"the demo has attribute names for N <= {len(ATTRS)}")
    users = users or max(M, 2)
    config = WorldConfig(N=N, M=M, pool_size=4, ring_mode=ring_mode)
    world = build_world(config, seed=seed, users=users)
    say(f"setup: {len(world.rsus)} RSUs, {len(world.dts)} DTs, {len(world.users)} users, "
        f"{len(world.directory)} one-time keys in the directory")
    say(f"issuer key distributed; x list has {len(world.x_all)} points")

    alice = "U1"
    attrs = ATTRS[:N]
    cred = run_issue_phase(world, alice, attrs)
    say(f"{alice} obtained a credential on {attrs}")
    say(f"  cred0 = {cred.cred0.to_bytes().hex()[:24]}...")

    world.advance(5)
    D = list(range(1, Nprime + 1))
    env, ctx = build_auth_request(world, alice, "RSU1", D)
    reply = rsu_handle_auth(world, "RSU1", env, alice)
    result = user_finish_auth(world, alice, "RSU1", reply, ctx)
    say(f"{alice} showed positions {D} to RSU1 and was assigned {result.dt_id}")
    try:
        rsu_handle_auth(world, "RSU1", env, alice)
        say("replayed request ACCEPTED (unexpected)")
    except AuthRejected as exc:
        say(f"replayed request refused: {exc.reason}")

    world.advance(5)
    trace = run_trace_phase(world, result.evidence)
    say(f"trace of that request contacted {len(trace.contacted)} ring members "
        f"(of {len(world.users)} registered) and identified {trace.user_id}")

    world.advance(5)
    updates = [(j, attrs[j - 1] + "*") for j in range(1, U + 1)]
    run_update_phase(world, alice, updates)
    say(f"{alice} updated positions {[p for p, _ in updates]}")
    world.advance(5)
    again = run_auth_phase(world, alice, "RSU2", list(range(1, N + 1)))
    say(f"{alice} showed every attribute to RSU2 after the update; assigned {again.dt_id}")

    log = world.transport.log
    per_phase = Counter()
    msgs = Counter()
    for e in log:
        per_phase[e.phase] += e.bytes
        msgs[e.phase] += 1
    for phase in per_phase:
        say(f"  {phase:8s} {msgs[phase]:5d} messages {per_phase[phase]:10d} bytes")
    digest = hashlib.sha256(world.transport.transcript().encode()).hexdigest()
    say(f"transcript sha256 {digest}")
    return world
