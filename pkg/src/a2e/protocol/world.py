"""Entities, registries and the simulated world they live in."""

import random
import time
from collections import defaultdict
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from ..crypto_core import ecc
from ..crypto_core.params import setup
from ..errors import ProtocolError
from ..otrs import gen_one_time_key
from .transport import Kind, Transport


@dataclass
class WorldConfig:
    N: int = 5
    M: int = 100
    L: int = 256
    lam: int = 128
    pool_size: int = 64
    freshness_window: float = 60.0
    ring_mode: str = "ids"  # or "keys"
    threshold: Optional[int] = None  # defaults to N


@dataclass(eq=False)
class Entity:
    id: str
    kind: Kind
    index: int


@dataclass(eq=False)
class SPState(Entity):
    keys: ecc.KeyPairEC = None
    issuer_secret: object = None
    rsus: Dict[str, "RSUState"] = field(default_factory=dict)
    dts: Dict[str, "DTState"] = field(default_factory=dict)
    users: Dict[str, "UserState"] = field(default_factory=dict)


@dataclass(eq=False)
class RSUState(Entity):
    keys: ecc.KeyPairEC = None
    share: object = None
    x_all: tuple = ()
    pk_issuer: object = None
    seen: Dict[bytes, float] = field(default_factory=dict)  # req -> expiry
    dts: List[str] = field(default_factory=list)
    next_dt: int = 0
    observed: list = field(default_factory=list)  # everything a curious RSU keeps
    pending: dict = field(default_factory=dict)  # issuance session -> state


@dataclass(eq=False)
class DTState(Entity):
    keys: ecc.KeyPairEC = None
    rsu: str = ""
    assignments: list = field(default_factory=list)


@dataclass(eq=False)
class UserState(Entity):
    pool: list = field(default_factory=list)  # OneTimeKeyPair per slot
    used: set = field(default_factory=set)
    next_slot: int = 0
    attrs: List[str] = field(default_factory=list)
    credential: object = None
    history: list = field(default_factory=list)  # (phase, slot, message) per signature

    def fresh_slot(self):
        while self.next_slot < len(self.pool):
            if self.next_slot not in self.used:
                return self.next_slot
            self.next_slot += 1
        return None


class Directory:
    """Maps key handles (user number, pool slot) to one-time public keys."""

    def __init__(self):
        self._keys = {}
        self._owner = {}
        self._by_fp = {}
        self._by_user = defaultdict(list)

    @staticmethod
    def handle(user_index: int, slot: int) -> bytes:
        return user_index.to_bytes(4, "big") + slot.to_bytes(2, "big")

    @staticmethod
    def split(handle: bytes):
        return int.from_bytes(handle[:4], "big"), int.from_bytes(handle[4:], "big")

    def add(self, user_id, user_index, slot, pk):
        h = self.handle(user_index, slot)
        self._keys[h] = pk
        self._owner[h] = user_id
        self._by_fp[pk.fingerprint] = h
        self._by_user[user_id].append(h)
        return h

    def resolve(self, handle: bytes):
        return self._keys[bytes(handle)]

    def handle_of_key(self, pk) -> bytes:
        return self._by_fp[pk.fingerprint]

    def owner(self, handle: bytes) -> str:
        return self._owner[bytes(handle)]

    def handles_of(self, user_id):
        return list(self._by_user[user_id])

    def users(self):
        return list(self._by_user)

    def __len__(self):
        return len(self._keys)


class World:
    """Everything one simulation run touches.

    ``seed`` fixes every random choice (keys, rings, nonces, encryption), so
    two worlds built with the same seed and driven through the same calls
    produce byte-identical transcripts.
    """

    def __init__(self, config: WorldConfig = None, seed: Optional[int] = None):
        self.config = config or WorldConfig()
        c = self.config
        self.params = setup(c.lam, max(c.N, 1), c.L)
        self.rng = random.Random(seed) if seed is not None else random.SystemRandom()
        self.now = 0.0
        self.transport = Transport(lambda: self.now)
        self.directory = Directory()
        self.sp = SPState("SP", Kind.SP, 0, keys=ecc.ec_keygen(self.rng))
        self.rsus: Dict[str, RSUState] = {}
        self.dts: Dict[str, DTState] = {}
        self.users: Dict[str, UserState] = {}
        self.pk_issuer = None
        self.x_all = ()
        self.unresponsive = set()  # users who ignore trace requests
        self.compute = defaultdict(float)  # (phase, entity id) -> seconds

    # -- clock and meters
    def advance(self, seconds: float):
        self.now += seconds

    @contextmanager
    def timer(self, phase: str, entity: Entity):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.compute[(phase, entity.id)] += time.perf_counter() - t0

    def reset_meters(self):
        self.compute.clear()

    def entity(self, entity_id: str) -> Entity:
        if entity_id == self.sp.id:
            return self.sp
        for table in (self.rsus, self.dts, self.users):
            if entity_id in table:
                return table[entity_id]
        raise KeyError(entity_id)

    def rsu_list(self):
        return sorted(self.rsus.values(), key=lambda r: r.index)

    def rsu_for_position(self, pos: int) -> RSUState:
        for r in self.rsus.values():
            if r.share is not None and r.share.index == pos:
                return r
        raise ProtocolError(f"no RSU holds position {pos}")


def _check_new_id(world, entity_id):
    try:
        world.entity(entity_id)
    except KeyError:
        return
    raise ProtocolError(f"duplicate id {entity_id!r}")


def register(world: World, kind: str, entity_id: str, rsu: Optional[str] = None, pool_size=None):
    """Enrol an entity with SP over the (unmetered) secure channel.

    RSUs and DTs get an EC key pair; users get a pool of one-time ring keys
    published in the directory.  Returns the key material handed over.
    """
    kind = kind.upper()
    _check_new_id(world, entity_id)
    if kind == "RSU":
        ent = RSUState(entity_id, Kind.RSU, len(world.rsus) + 1, keys=ecc.ec_keygen(world.rng))
        world.rsus[entity_id] = ent
        world.sp.rsus[entity_id] = ent
        return ent.keys
    if kind == "DT":
        if not world.rsus:
            raise ProtocolError("register an RSU before its DTs")
        if rsu is None:
            rsus = world.rsu_list()
            rsu = rsus[len(world.dts) % len(rsus)].id
        if rsu not in world.rsus:
            raise ProtocolError(f"unknown RSU {rsu!r}")
        ent = DTState(entity_id, Kind.DT, len(world.dts) + 1, keys=ecc.ec_keygen(world.rng), rsu=rsu)
        world.dts[entity_id] = ent
        world.sp.dts[entity_id] = ent
        world.rsus[rsu].dts.append(entity_id)
        return ent.keys
    if kind == "USER":
        ent = UserState(entity_id, Kind.USER, len(world.users) + 1)
        world.users[entity_id] = ent
        world.sp.users[entity_id] = ent
        add_user_keys(world, ent, pool_size or world.config.pool_size)
        return ent.pool
    raise ProtocolError(f"unknown entity kind {kind!r}")


def add_user_keys(world: World, user: UserState, count: int):
    """Top up a user's pool (also over the secure channel)."""
    for _ in range(count):
        slot = len(user.pool)
        key = gen_one_time_key(world.params, world.rng)
        user.pool.append(key)
        world.directory.add(user.id, user.index, slot, key.pk)
