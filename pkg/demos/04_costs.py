"""A small cost sweep: RSU auth time over N' and per-RSU update time over U."""

from a2e.bench import BenchConfig, bench_sweep

cfg = BenchConfig(N=[5], Nprime=[1, 3, 5], M=[10], U=[1, 3, 5], reps=5, phases=["auth", "update"])
rows = bench_sweep(cfg)

print("phase   entity  N' U   mean_ms  bytes")
for r in rows:
    if r.entity in ("RSU", "User"):
        print(f"{r.phase:7s} {r.entity:6s} {r.Nprime:2d} {r.U:2d} {r.mean_us / 1000:8.2f} {r.bytes:6d}")
