"""Chimp Optimization Algorithm (ChOA).

Every chimp belongs to one of four schedule groups for the whole run; its
group fixes how the coefficient ``f`` decays over iterations. Each iteration a
chimp either averages four moves toward the current leaders (attacker,
barrier, chaser, driver: the four best points seen so far) or is re-placed at
a chaotic point of the search box.

All random draws of an iteration happen serially, chimp by chimp, before any
objective evaluation, so parallel evaluation never changes a run.
"""

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from . import chaos
from .core import RunTrace, Tracker, clamp, evaluate, init_population, should_stop
from .errors import InvalidInputError


class Strategy(enum.Enum):
    CHOA1 = "choa1"
    CHOA2 = "choa2"

    @classmethod
    def from_name(cls, name):
        try:
            return cls(name.lower())
        except ValueError:
            raise InvalidInputError(f"unknown ChOA strategy {name!r}") from None


class Group(enum.IntEnum):
    ONE = 1
    TWO = 2
    THREE = 3
    FOUR = 4


def dynamic_f(strategy, group, t, T):
    """Decay schedule of ``f`` for a group at iteration ``t`` of ``T``."""
    if not 1 <= t <= T:
        raise InvalidInputError(f"need 1 <= t <= T, got t={t}, T={T}")
    group = Group(group)
    r = t / T
    if strategy is Strategy.CHOA1:
        if group is Group.ONE:
            return 1.95 - 2.0 * t ** (1 / 4) / T ** (1 / 3)
        if group is Group.TWO:
            return 1.85 - 3.0 * t ** (1 / 3) / T ** (1 / 4)
        if group is Group.THREE:
            return -3.0 * r**3 + 1.5
        return -2.0 * r**3 + 1.5
    if group is Group.ONE:
        # log(t)/log(T) is 0/0 when T == 1; t == T there, so the ratio is 1
        ratio = 1.0 if T == 1 else math.log(t) / math.log(T)
        return 2.5 - 2.0 * ratio
    if group is Group.TWO:
        return -2.0 * r**3 + 2.5
    if group is Group.THREE:
        return 0.5 + 2.0 * math.exp(-((4.0 * r) ** 2))
    return 2.5 + 2.0 * r**2 - 2.0 * (2.0 * r)


def coefficients(f, rng, stream):
    """Draw ``(a, c, m)``; returns them with the advanced chaotic stream."""
    a = 2.0 * f * rng.random() - f
    c = 2.0 * rng.random()
    stream, m = chaos.step(stream)
    return a, c, m, stream


def encircle(x_chimp, x_prey, a, c, m):
    x_chimp = np.asarray(x_chimp, dtype=np.float64)
    x_prey = np.asarray(x_prey, dtype=np.float64)
    if x_chimp.shape != x_prey.shape:
        raise InvalidInputError(f"length mismatch: {x_chimp.shape} vs {x_prey.shape}")
    d = np.abs(c * x_prey - m * x_chimp)
    return x_prey - a * d


def leader_update(x, leaders, draws):
    """Mean of the four leader-guided moves; ``draws`` holds four ``(a, c, m)``."""
    leaders = np.asarray(leaders, dtype=np.float64)
    if leaders.shape[0] != 4 or len(draws) != 4:
        raise InvalidInputError("need exactly four leaders and four coefficient draws")
    moves = [encircle(x, leaders[k], *draws[k]) for k in range(4)]
    return sum(moves) / 4.0


def assign_groups(n, rng):
    """Random partition into four groups whose sizes differ by at most one."""
    groups = np.arange(n) % 4 + 1
    rng.shuffle(groups)
    return groups


def select_leaders(positions, losses):
    """The four smallest losses, sorted; among equal losses distinct positions go first.

    Taking the four smallest keeps every leader rank non-increasing when the
    previous leaders are part of ``positions``.
    """
    order = np.argsort(losses, kind="stable")
    picked = []
    k = 0
    while len(picked) < 4 and k < len(order):
        tie = [i for i in order[k:] if losses[i] == losses[order[k]]]
        k += len(tie)
        fresh, dup = [], []
        for i in tie:
            seen = any(np.array_equal(positions[i], positions[j]) for j in picked + fresh)
            (dup if seen else fresh).append(i)
        picked.extend((fresh + dup)[:4 - len(picked)])
    while len(picked) < 4:
        picked.append(picked[-1])
    picked = np.asarray(picked)
    return positions[picked].copy(), losses[picked].copy()


@dataclass
class ChoaState:
    positions: np.ndarray
    losses: np.ndarray
    groups: np.ndarray
    leaders: np.ndarray  # attacker, barrier, chaser, driver
    leader_losses: np.ndarray
    coeff_stream: chaos.ChaoticStream
    position_stream: chaos.ChaoticStream
    iteration: int = 0


def init_state(space, objective, cfg, rng):
    positions = init_population(space, cfg.population, rng)
    losses = evaluate(objective, positions, cfg.n_jobs)
    groups = assign_groups(cfg.population, rng)
    kind = cfg.chaos_map
    position_stream = chaos.ChaoticStream.start(kind, chaos.interior_seeds(kind, rng, space.dim))
    # a drawn seed, since gauss from 0.7 falls into a short rational cycle
    coeff_stream = chaos.ChaoticStream.start(kind, float(chaos.interior_seeds(kind, rng, None)))
    leaders, leader_losses = select_leaders(positions, losses)
    return ChoaState(positions, losses, groups, leaders, leader_losses,
                     coeff_stream, position_stream)


def _chaotic_point(space, stream):
    stream, v = chaos.step(stream)
    return space.lower + chaos.to_unit(stream.kind, v) * space.width, stream


def propose(state, space, cfg, strategy, rng):
    """New (unclamped) positions for every chimp plus the advanced streams.

    Per chimp the draw order is ``mu`` then four ``(r1, r2)`` pairs, matching
    four serial ``coefficients`` calls; the m values come from the scalar
    stream in the same order.
    """
    n = len(state.positions)
    t = state.iteration + 1
    f = np.array([dynamic_f(strategy, g, t, cfg.max_iters) for g in state.groups])
    u = rng.random((n, 9))
    mu = u[:, 0]
    a = 2.0 * f[:, None] * u[:, 1::2] - f[:, None]
    c = 2.0 * u[:, 2::2]
    coeff_stream, m = chaos.take(state.coeff_stream, 4 * n)
    m = m.reshape(n, 4)

    # (n, 4, dim): one encircling move per chimp and leader
    x = state.positions
    d = np.abs(c[:, :, None] * state.leaders[None] - m[:, :, None] * x[:, None, :])
    new = np.mean(state.leaders[None] - a[:, :, None] * d, axis=1)

    position_stream = state.position_stream
    for i in np.flatnonzero(~((mu < 0.5) & (np.abs(a[:, 0]) < 1.0))):
        new[i], position_stream = _chaotic_point(space, position_stream)
    return new, coeff_stream, position_stream


def step(state, space, objective, cfg, strategy, rng, tracker=None):
    new, coeff_stream, position_stream = propose(state, space, cfg, strategy, rng)
    new = clamp(space, new)
    losses = evaluate(objective, new, cfg.n_jobs)
    if tracker is not None:
        tracker.observe(new, losses)
    pool = np.vstack([state.leaders, new])
    pool_losses = np.concatenate([state.leader_losses, losses])
    leaders, leader_losses = select_leaders(pool, pool_losses)
    return replace(state, positions=new, losses=losses, leaders=leaders,
                   leader_losses=leader_losses, coeff_stream=coeff_stream,
                   position_stream=position_stream, iteration=state.iteration + 1)


def optimize(space, objective, cfg, strategy=Strategy.CHOA2) -> RunTrace:
    """Run ChOA to ``cfg.max_iters`` (or ``cfg.target_loss``); the answer is the attacker."""
    if isinstance(strategy, str):
        strategy = Strategy.from_name(strategy)
    rng = np.random.default_rng(cfg.seed)
    tracker = Tracker()
    state = init_state(space, objective, cfg, rng)
    tracker.observe(state.positions, state.losses)
    while not should_stop(cfg, state.iteration, state.leader_losses[0]):
        state = step(state, space, objective, cfg, strategy, rng, tracker)
        tracker.end_iteration()
    trace = tracker.finish()
    trace.best_position = state.leaders[0].copy()
    trace.best_loss = float(state.leader_losses[0])
    return trace
