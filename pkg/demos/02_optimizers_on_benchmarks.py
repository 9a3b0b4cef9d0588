"""ChOA and three population baselines on sphere and Rastrigin."""
import numpy as np

from dcelm import baselines, choa, metrics
from dcelm.core import OptimizerConfig, SearchSpace
from dcelm.functions import FUNCTIONS

seeds = range(5)
for name, (fn, (lo, hi)) in FUNCTIONS.items():
    space = SearchSpace.box(10, lo, hi)
    finals = {}
    for opt in ("choa1", "choa2", "ga", "cs", "woa"):
        runs = []
        for s in seeds:
            cfg = OptimizerConfig(population=30, max_iters=200, seed=s)
            if opt.startswith("choa"):
                tr = choa.optimize(space, fn, cfg, opt)
            else:
                tr = baselines.optimize(opt, space, fn, cfg)
            runs.append(tr.best_loss)
        finals[opt] = np.array(runs)
        print(f"{name:9s} {opt:5s} median {np.median(runs):.3e}  worst {np.max(runs):.3e}")
    # two-sided rank-sum test of chimp against each baseline
    for other in ("ga", "cs", "woa"):
        p = metrics.wilcoxon_rank_sum(finals["choa2"], finals[other])["p_value"]
        print(f"  choa2 vs {other}: p = {p:.4f}")

# the best-so-far curve is monotone by construction
tr = choa.optimize(SearchSpace.box(10, -10, 10), FUNCTIONS["sphere"][0], OptimizerConfig(max_iters=50))
print("trace is non-increasing:", bool(np.all(np.diff(tr.best_losses) <= 0)))
