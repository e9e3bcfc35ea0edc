"""Issue a five-attribute credential, show parts of it, and watch tampering fail."""

import dataclasses
import random

from a2e.credential import derive_show, expected_cred1, issue_locally, verify_shown
from a2e.crypto_core.groups import G1
from a2e.crypto_core.hashing import attr_to_scalar
from a2e.crypto_core.params import setup

rng = random.Random(1)
params = setup()

names = ["age:adult", "licence:B", "lang:en", "pay:card", "rating:5"]
attrs = [attr_to_scalar(a) for a in names]

# five issuer shares, one per attribute position, aggregated by the holder
iss = issue_locally(params, attrs, rng)
cred = iss.credential
print("credential aggregated from", len(iss.partials), "partials")
print("matches the issuer-secret oracle:", cred.cred1 == expected_cred1(iss.secret, cred.cred0, attrs))

# disclose positions 1 and 3 only
shown = derive_show(cred, [1, 3], iss.pk, rng)
print("disclosed positions", shown.positions, "verify:", bool(verify_shown(iss.pk, shown)))

# a second showing of the same credential shares no group element with the first
again = derive_show(cred, [1, 3], iss.pk, rng)
print("showings unlinkable by value:", shown.cred0p != again.cred0p and shown.credp != again.credp)

# claim a different value at position 3
(j1, a1), (j3, _) = shown.disclosed
lie = dataclasses.replace(shown, disclosed=((j1, a1), (j3, attr_to_scalar("lang:fr"))))
print("lying about position 3:", verify_shown(iss.pk, lie))

bent = dataclasses.replace(shown, cred2p=shown.cred2p * G1.generator())
print("bent proof element:", verify_shown(iss.pk, bent))
