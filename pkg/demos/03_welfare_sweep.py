"""
How close to optimal?
=====================

Across p from egalitarian to utilitarian, compare the solver's welfare
with the exhaustive optimum on small random instances.  The guarantee is
alpha / (4(n+1)); in practice the ratio sits far above it.
"""

# %%
import numpy as np

from fairdiv import EngineConfig, FAMILIES, GeneratorSpec
from fairdiv.pipeline import bench, format_table

specs = [GeneratorSpec(f, n=3, m=7, seed=500) for f in FAMILIES]
rows, table = bench(specs, ["-inf", -1, 0, 1], [EngineConfig("half-efx")], trials=10)
print(format_table(table))

# %%
ratios = np.array([r["ratio"] for r in rows])
print(f"{len(rows)} runs, ratio min {ratios.min():.3f}, median {np.median(ratios):.3f}")
print("guarantee for n=3, alpha=1/2:", 0.5 / 16)

# %% [markdown]
# The worst cases come from the egalitarian end, where one agent's small
# bundle drags the minimum down.

# %%
by_p = {}
for r in rows:
    by_p.setdefault(r["p"], []).append(r["ratio"])
for p, rs in by_p.items():
    print(f"p={p:>4}: min {min(rs):.3f}  mean {np.mean(rs):.3f}")
