"""Multi-entity simulator: SP, RSUs, DTs and users exchanging metered messages."""

from .transport import Kind, Phase, Transport, decode_envelope, encode_envelope
from .world import Directory, World, WorldConfig, add_user_keys, register
from .phases import (
    AuthResult,
    TraceEvidence,
    TraceResult,
    build_auth_request,
    check_freshness,
    choose_ring,
    rsu_handle_auth,
    run_auth_phase,
    run_issue_key_distribution,
    run_issue_phase,
    run_trace_phase,
    run_update_phase,
    user_finish_auth,
)


def build_world(config=None, seed=None, users=100, dts_per_rsu=1, pool_size=None):
    """Register N RSUs, their DTs and ``users`` users, then distribute issue keys."""
    world = World(config, seed)
    N = world.config.N
    for i in range(1, N + 1):
        register(world, "RSU", f"RSU{i}")
    for i in range(1, N + 1):
        for d in range(dts_per_rsu):
            register(world, "DT", f"DT{i}.{d + 1}", rsu=f"RSU{i}")
    for u in range(1, users + 1):
        register(world, "USER", f"U{u}", pool_size=pool_size)
    run_issue_key_distribution(world)
    return world


__all__ = [
    "Kind", "Phase", "Transport", "decode_envelope", "encode_envelope",
    "Directory", "World", "WorldConfig", "add_user_keys", "register", "build_world",
    "AuthResult", "TraceEvidence", "TraceResult",
    "build_auth_request", "check_freshness", "choose_ring", "rsu_handle_auth", "user_finish_auth",
    "run_auth_phase", "run_issue_key_distribution", "run_issue_phase", "run_trace_phase",
    "run_update_phase",
]
