"""Comparison optimizers: real-coded GA, cuckoo search and the whale optimizer.

Each ``*_step`` maps ``(population, losses, rng, space, evaluate, ...)`` to a new
``(population, losses)`` and keeps the incumbent best point, so the population
best never gets worse.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import clamp, run_population
from .errors import InvalidInputError


class BaselineKind(enum.Enum):
    GA = "ga"
    CS = "cs"
    WOA = "woa"


@dataclass(frozen=True)
class GAParams:
    crossover_prob: float = 0.7
    mutation_prob: float = 0.1
    mutation_scale: float = 0.1  # sigma as a fraction of each dimension's width
    tournament: int = 2


@dataclass(frozen=True)
class CSParams:
    discovery_rate: float = 0.25
    levy_beta: float = 1.5
    step_scale: float = 0.01  # fraction of each dimension's width


@dataclass(frozen=True)
class WOAParams:
    spiral_b: float = 1.0


def _check_prob(name, p):
    if not 0.0 <= p <= 1.0:
        raise InvalidInputError(f"{name} must lie in [0, 1], got {p}")


def _tournament(losses, rng, k):
    idx = rng.integers(0, len(losses), size=k)
    return idx[np.argmin(losses[idx])]


def ga_step(population, losses, rng, space, evaluate, params=GAParams()):
    _check_prob("crossover_prob", params.crossover_prob)
    _check_prob("mutation_prob", params.mutation_prob)
    n, dim = population.shape
    best = int(np.argmin(losses))
    children = [population[best].copy()]
    while len(children) < n:
        p1 = population[_tournament(losses, rng, params.tournament)]
        p2 = population[_tournament(losses, rng, params.tournament)]
        if rng.random() < params.crossover_prob:
            mask = rng.random(dim) < 0.5
            c1, c2 = np.where(mask, p1, p2), np.where(mask, p2, p1)
        else:
            c1, c2 = p1.copy(), p2.copy()
        for child in (c1, c2):
            hit = rng.random(dim) < params.mutation_prob
            noise = rng.normal(0.0, params.mutation_scale, dim) * space.width
            children.append(child + np.where(hit, noise, 0.0))
    new = clamp(space, np.asarray(children[:n]))
    new_losses = evaluate(new)
    return new, new_losses


def levy_flight(rng, beta, size):
    """Mantegna's algorithm for Levy-stable steps."""
    sigma = (math.gamma(1 + beta) * math.sin(math.pi * beta / 2)
             / (math.gamma((1 + beta) / 2) * beta * 2 ** ((beta - 1) / 2))) ** (1 / beta)
    u = rng.normal(0.0, sigma, size)
    v = rng.normal(0.0, 1.0, size)
    return u / np.abs(v) ** (1 / beta)


def cs_step(population, losses, rng, space, evaluate, params=CSParams()):
    _check_prob("discovery_rate", params.discovery_rate)
    n, dim = population.shape
    pop = population.copy()
    losses = losses.copy()

    # each nest lays one egg by a Levy flight; keep it if it beats its own nest
    flights = levy_flight(rng, params.levy_beta, (n, dim))
    eggs = clamp(space, pop + params.step_scale * space.width * flights)
    egg_losses = evaluate(eggs)
    better = egg_losses < losses
    pop[better] = eggs[better]
    losses[better] = egg_losses[better]

    # abandon the worst fraction of nests; the best nest is never among them
    n_drop = min(int(math.floor(params.discovery_rate * n)), n - 1)
    if n_drop > 0:
        worst = np.argsort(losses, kind="stable")[n - n_drop:]
        pop[worst] = space.lower + rng.random((n_drop, dim)) * space.width
        losses[worst] = evaluate(pop[worst])
    return pop, losses


def woa_a(t, T):
    """Linearly decreasing control parameter: 2 at t = 0, 0 at t = T."""
    return 2.0 * (1.0 - t / T)


def woa_step(population, losses, rng, space, evaluate, t, T, params=WOAParams()):
    n, dim = population.shape
    best_i = int(np.argmin(losses))
    best = population[best_i]
    a = woa_a(t, T)
    new = population.copy()
    for i in range(n):
        if i == best_i:
            continue
        x = population[i]
        r1, r2, p = rng.random(), rng.random(), rng.random()
        A = 2.0 * a * r1 - a
        C = 2.0 * r2
        if p < 0.5:
            ref = best if abs(A) < 1.0 else population[rng.integers(0, n)]
            new[i] = ref - A * np.abs(C * ref - x)
        else:
            ell = rng.uniform(-1.0, 1.0)
            dist = np.abs(best - x)
            new[i] = dist * math.exp(params.spiral_b * ell) * math.cos(2 * math.pi * ell) + best
    new = clamp(space, new)
    new_losses = evaluate(new)
    return new, new_losses


def optimize(kind, space, objective, cfg, params=None):
    if isinstance(kind, str):
        kind = BaselineKind(kind.lower())
    if kind is BaselineKind.GA:
        params = params or GAParams()
        step = lambda P, L, rng, sp, ev, t, T: ga_step(P, L, rng, sp, ev, params)  # noqa: E731
    elif kind is BaselineKind.CS:
        params = params or CSParams()
        step = lambda P, L, rng, sp, ev, t, T: cs_step(P, L, rng, sp, ev, params)  # noqa: E731
    else:
        params = params or WOAParams()
        step = lambda P, L, rng, sp, ev, t, T: woa_step(P, L, rng, sp, ev, t, T, params)  # noqa: E731
    return run_population(step, space, objective, cfg)
