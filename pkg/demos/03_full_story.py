"""Registration, key distribution, issue, auth with a replay, trace and update
between simulated parties, followed by the per-sender byte counts."""

from a2e.demo import run_demo

world = run_demo(seed=7, N=5, Nprime=3, M=20, U=2)

print()
print("bytes sent per entity")
for sender, n in sorted(world.transport.bytes_by_sender().items(), key=lambda kv: -kv[1])[:8]:
    print(f"  {sender:8s} {n:>9d}")

print()
print("first messages of the transcript")
for line in world.transport.transcript().splitlines()[:5]:
    print(" ", line)
