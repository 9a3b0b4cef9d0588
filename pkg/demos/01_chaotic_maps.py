"""Six chaotic maps that stand in for uniform noise inside the chimp update."""
import numpy as np

from dcelm import chaos
from dcelm.chaos import ChaoticMap

# every map is a one-line recurrence; the stream keeps its own state
for kind in ChaoticMap:
    xs = np.asarray(chaos.sequence(kind, seed=0.7, n=5000))
    lo, hi = kind.range
    print(f"{kind.value:10s} range [{lo:+.0f}, {hi:+.0f}]  first {np.round(xs[:4], 4)}  "
          f"mean {xs.mean():+.3f}  distinct {np.unique(xs).size}")

# orbits never leave their range and never settle on a constant
xs = np.asarray(chaos.sequence(ChaoticMap.BERNOULLI, seed=0.7, n=10_000))
print("bernoulli stays in range:", chaos.is_in_range(ChaoticMap.BERNOULLI, xs))
print("consecutive repeats:", int(np.sum(np.diff(xs) == 0)))

# a histogram shows how unevenly each map covers its interval
for kind in (ChaoticMap.GAUSS, ChaoticMap.SINE):
    u = chaos.to_unit(kind, np.asarray(chaos.sequence(kind, seed=0.3, n=20_000)))
    print(kind.value, np.histogram(u, bins=5, range=(0, 1))[0])
