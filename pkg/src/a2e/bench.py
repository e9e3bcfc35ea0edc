"""Per-entity, per-phase cost measurement over parameter sweeps.

Each (phase, parameter point) gets its own world.  World construction and
one warm-up repetition are excluded, and the garbage collector is paused
inside each repetition; every later repetition records the
compute time of each participating entity (from the world's timers) and
the bytes it sent (from the transport log).  Roles with several instances
(RSUs, trace responders) report the per-instance mean.
"""

import contextlib
import csv
import gc
import itertools
import statistics
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from .protocol import (
    WorldConfig,
    add_user_keys,
    build_world,
    run_auth_phase,
    run_issue_key_distribution,
    run_issue_phase,
    run_trace_phase,
    run_update_phase,
)

HEADER = ["phase", "entity", "N", "Nprime", "M", "U", "mean_us", "stddev_us", "bytes", "reps"]
PHASES = ("issue", "auth", "trace", "update")
PRESET_POINT = {"N": 5, "Nprime": 3, "M": 100, "U": 2}
ROLE_OF = {"S": "SP", "R": "RSU", "D": "DT", "U": "User"}


@dataclass
class BenchConfig:
    lam: int = 128
    L: int = 256
    N: Sequence[int] = (5,)
    Nprime: Sequence[int] = (3,)
    M: Sequence[int] = (100,)
    U: Sequence[int] = (2,)
    reps: int = 5
    warmup: int = 1
    seed: int = 0
    out: str = None
    ring_mode: str = "ids"
    phases: Sequence[str] = PHASES

    def validate(self):
        if self.reps < 1 or self.warmup < 0:
            raise ValueError("reps must be >= 1 and warmup >= 0")
        if max(self.Nprime) > min(self.N) or min(self.Nprime) < 1:
            raise ValueError("N' must lie in 1..N for every swept N")
        if max(self.U) > min(self.N) or min(self.U) < 0:
            raise ValueError("U must lie in 0..N for every swept N")
        if min(self.M) < 1 or min(self.N) < 1:
            raise ValueError("N and M must be positive")
        unknown = set(self.phases) - set(PHASES)
        if unknown:
            raise ValueError(f"unknown phases {sorted(unknown)}")


@dataclass
class BenchRow:
    phase: str
    entity: str
    N: int
    Nprime: int
    M: int
    U: int
    mean_us: float
    stddev_us: float
    bytes: int
    reps: int
    samples_us: List[float] = field(default_factory=list, repr=False)

    def csv_row(self):
        return [self.phase, self.entity, self.N, self.Nprime, self.M, self.U,
                f"{self.mean_us:.1f}", f"{self.stddev_us:.1f}", self.bytes, self.reps]

    @property
    def median_us(self):
        return statistics.median(self.samples_us)


def role(entity_id: str) -> str:
    return ROLE_OF[entity_id[0]]


def _attrs(n, tag=""):
    return [f"attr{j}{tag}" for j in range(1, n + 1)]


class _Recorder:
    """Collects one sample per repetition for every (timer phase, role)."""

    def __init__(self):
        self.time = {}
        self.bytes = {}

    def add(self, world, mark, phase_map):
        per = {}
        for (tphase, eid), secs in world.compute.items():
            if tphase in phase_map:
                key = (phase_map[tphase], role(eid))
                per.setdefault(key, {}).setdefault(eid, 0.0)
                per[key][eid] += secs
        for key, by_entity in per.items():
            self.time.setdefault(key, []).append(1e6 * statistics.mean(by_entity.values()))
        sent = {}
        for e in world.transport.since(mark):
            if e.phase in phase_map:
                key = (phase_map[e.phase], role(e.src))
                sent.setdefault(key, {}).setdefault(e.src, 0)
                sent[key][e.src] += e.bytes
        for key, by_entity in sent.items():
            self.bytes[key] = round(statistics.mean(by_entity.values()))


@contextlib.contextmanager
def gc_paused():
    """Keep the cyclic collector out of a timed section; collect afterwards."""
    enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if enabled:
            gc.enable()
        gc.collect()


def _world(cfg: BenchConfig, N, M, seed):
    config = WorldConfig(N=N, M=M, L=cfg.L, lam=cfg.lam, pool_size=2, ring_mode=cfg.ring_mode)
    return build_world(config, seed=seed, users=max(M, 2))


def _run_reps(world, cfg, step, phase_map):
    rec = _Recorder()
    for rep in range(cfg.warmup + cfg.reps):
        prepared = step.prepare(world, rep) if hasattr(step, "prepare") else None
        world.reset_meters()
        mark = world.transport.mark()
        with gc_paused():
            step(world, rep, prepared)
        world.advance(1.0)
        if rep >= cfg.warmup:
            rec.add(world, mark, phase_map)
    return rec


def _issue_step(N):
    def step(world, rep, _):
        run_issue_key_distribution(world)
        run_issue_phase(world, "U1", _attrs(N, f".{rep}"))
    return step


def _auth_step(Nprime):
    def step(world, rep, _):
        run_auth_phase(world, "U1", "RSU1", list(range(1, Nprime + 1)))
    return step


class _TraceStep:
    def prepare(self, world, rep):
        return run_auth_phase(world, "U1", "RSU1", [1]).evidence

    def __call__(self, world, rep, evidence):
        run_trace_phase(world, evidence)


def _update_step(U):
    def step(world, rep, _):
        run_update_phase(world, "U1", [(j, f"upd{j}.{rep}") for j in range(1, U + 1)])
    return step


def _points(cfg: BenchConfig, phase):
    if phase == "issue":
        return [(N, 0, M, 0) for N, M in itertools.product(cfg.N, cfg.M)]
    if phase == "auth":
        return [(N, Np, M, 0) for N, Np, M in itertools.product(cfg.N, cfg.Nprime, cfg.M)]
    if phase == "trace":
        return [(min(cfg.N), 1, M, 0) for M in cfg.M]
    return [(N, 0, M, U) for N, M, U in itertools.product(cfg.N, cfg.M, cfg.U)]


def measure(cfg: BenchConfig, phase: str, N: int, Nprime: int, M: int, U: int) -> Dict[Tuple[str, str], BenchRow]:
    """Run one parameter point and return rows keyed by (phase, role)."""
    world = _world(cfg, N, M, cfg.seed)
    # key material for every signature the measured user makes, handed out
    # up front so pool top-ups never land inside a timed section
    add_user_keys(world, world.users["U1"], (cfg.warmup + cfg.reps + 1) * (N + 1))
    if phase != "issue":
        run_issue_phase(world, "U1", _attrs(N))
    if phase == "issue":
        rec = _run_reps(world, cfg, _issue_step(N), {"keydist": "issue", "issue": "issue"})
    elif phase == "auth":
        rec = _run_reps(world, cfg, _auth_step(Nprime), {"auth": "auth", "derive": "derive"})
    elif phase == "trace":
        rec = _run_reps(world, cfg, _TraceStep(), {"trace": "trace"})
    else:
        rec = _run_reps(world, cfg, _update_step(U), {"update": "update"})
    rows = {}
    for key, samples in rec.time.items():
        ph, r = key
        rows[key] = BenchRow(ph, r, N, Nprime, M, U,
                             statistics.mean(samples),
                             statistics.stdev(samples) if len(samples) > 1 else 0.0,
                             rec.bytes.get(key, 0), len(samples), samples)
    return rows


def bench_sweep(cfg: BenchConfig) -> List[BenchRow]:
    cfg.validate()
    rows = []
    for phase in cfg.phases:
        for point in _points(cfg, phase):
            rows.extend(measure(cfg, phase, *point).values())
    rows.sort(key=lambda r: (r.phase, r.entity, r.N, r.Nprime, r.M, r.U))
    if cfg.out:
        write_csv(rows, cfg.out)
    return rows


def write_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(HEADER)
        for r in rows:
            w.writerow(r.csv_row())
