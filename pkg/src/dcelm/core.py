"""Search-space plumbing shared by every population optimizer."""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chaos import ChaoticMap
from .errors import InvalidInputError, NumericError


@dataclass(frozen=True)
class SearchSpace:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=np.float64))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=np.float64))
        if lo.shape != hi.shape or lo.ndim != 1 or lo.size == 0:
            raise InvalidInputError(f"bounds shapes differ or are empty: {lo.shape} vs {hi.shape}")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise InvalidInputError("bounds must be finite")
        if np.any(lo >= hi):
            raise InvalidInputError("lower bound must be strictly below upper in every dimension")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def box(cls, dim, lo, hi):
        return cls(np.full(dim, float(lo)), np.full(dim, float(hi)))

    @property
    def dim(self):
        return self.lower.size

    @property
    def width(self):
        return self.upper - self.lower


@dataclass(frozen=True)
class OptimizerConfig:
    population: int = 50
    max_iters: int = 10
    target_loss: float | None = None
    seed: int = 0
    chaos_map: ChaoticMap = ChaoticMap.GAUSS
    n_jobs: int = 1

    def __post_init__(self):
        if isinstance(self.chaos_map, str):
            object.__setattr__(self, "chaos_map", ChaoticMap.from_name(self.chaos_map))
        if self.population < 4:
            raise InvalidInputError(f"population must be >= 4, got {self.population}")
        if self.max_iters < 1:
            raise InvalidInputError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.n_jobs < 1:
            raise InvalidInputError("n_jobs must be >= 1")


@dataclass
class RunTrace:
    best_losses: list = field(default_factory=list)  # one entry per completed iteration
    best_position: np.ndarray | None = None
    best_loss: float = float("inf")
    evaluations: int = 0
    elapsed: float = 0.0

    @property
    def iterations(self):
        return len(self.best_losses)


def init_population(space, n, seed):
    """``n`` uniform random points in the box; ``seed`` may be an int or a Generator."""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return space.lower + rng.random((n, space.dim)) * space.width


def clamp(space, v):
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] != space.dim:
        raise InvalidInputError(f"vector length {v.shape[-1]} != dim {space.dim}")
    return np.clip(v, space.lower, space.upper)


def should_stop(cfg, iteration, best):
    if iteration >= cfg.max_iters:
        return True
    return cfg.target_loss is not None and best <= cfg.target_loss


def evaluate(objective, positions, n_jobs=1):
    """Losses for each row of ``positions``, gathered in row order."""
    if n_jobs > 1 and len(positions) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            losses = list(pool.map(objective, positions))
    else:
        losses = [objective(p) for p in positions]
    losses = np.asarray(losses, dtype=np.float64)
    bad = ~np.isfinite(losses)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise NumericError(f"objective returned {losses[i]} for candidate {i}")
    return losses


class Tracker:
    """Elitist bookkeeping: remembers the best point ever evaluated."""

    def __init__(self):
        self.trace = RunTrace()
        self._t0 = time.perf_counter()

    def observe(self, positions, losses):
        self.trace.evaluations += len(losses)
        i = int(np.argmin(losses))
        if losses[i] < self.trace.best_loss:
            self.trace.best_loss = float(losses[i])
            self.trace.best_position = np.array(positions[i], dtype=np.float64)

    def end_iteration(self):
        self.trace.best_losses.append(self.trace.best_loss)

    def finish(self):
        self.trace.elapsed = time.perf_counter() - self._t0
        return self.trace


def run_population(step_fn, space, objective, cfg):
    """Generic loop for optimizers whose step is ``(pop, losses, rng, t, T) -> (pop, losses)``.

    ``step_fn`` receives an ``evaluate`` callable so that it can score
    candidates itself (greedy schemes need that).
    """
    rng = np.random.default_rng(cfg.seed)
    tracker = Tracker()
    pop = init_population(space, cfg.population, rng)
    losses = evaluate(objective, pop, cfg.n_jobs)
    tracker.observe(pop, losses)

    def scored(candidates):
        out = evaluate(objective, candidates, cfg.n_jobs)
        tracker.observe(candidates, out)
        return out

    t = 0
    while not should_stop(cfg, t, tracker.trace.best_loss):
        pop, losses = step_fn(pop, losses, rng, space, scored, t, cfg.max_iters)
        t += 1
        tracker.end_iteration()
    return tracker.finish()
