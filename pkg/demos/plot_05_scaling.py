"""
How selection cost grows
========================

Times batched selection rounds for a few values of M and worker counts.
Worker threads only help when the host has spare cores.
"""

# %%
import os

from arssa.validate import bench_select

print("cores:", os.cpu_count())
print(f"{'M':>5} {'workers':>7} {'mean ms':>9} {'ns/draw':>8}")
for M in (64, 256, 1024):
    for workers in (1, 2, 4):
        r = bench_select(M, K=10000, rounds=5, workers=workers, repeats=3)
        print(f"{M:>5} {workers:>7} {r['mean_s'] * 1e3:>9.1f} "
              f"{r['per_selection_s'] / M * 1e9:>8.2f}")
