"""One-time ring signatures: sign inside a ring, then find the signer by tracing."""

import random

from a2e.otrs import MODE_IDS, MODE_KEYS, gen_one_time_key, ring_sign, ring_verify, size_model_bits, trace_match

rng = random.Random(2)
M = 8
keys = [gen_one_time_key(rng=rng) for _ in range(M)]
ring = [k.pk for k in keys]
handles = [i.to_bytes(6, "big") for i in range(M)]

me = 5
sig = ring_sign(ring, b"request 1", keys[me], me, rng, handles)
print("ring of", M, "verify:", bool(ring_verify(ring, b"request 1", sig)))
print("wrong message:", ring_verify(ring, b"request 2", sig))

# with the full keys the signature is dominated by the embedded public keys
print("bytes with keys embedded:", len(sig.to_bytes(MODE_KEYS)))
print("bytes with key handles:  ", len(sig.to_bytes(MODE_IDS)), "(model", size_model_bits(M, 256) // 8, ")")

# tracing: the signer answers a fresh challenge with the same key, and
# only its row of the two signatures lines up
answer = ring_sign(ring, b"trace challenge", keys[me], me, rng, handles)
print("trace points at ring position", trace_match(sig, answer))

someone_else = ring_sign(ring, b"trace challenge", keys[2], 2, rng, handles)
print("an innocent member's answer matches:", trace_match(sig, someone_else))
