import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dcelm.core import (OptimizerConfig, SearchSpace, Tracker, clamp, evaluate,
                        init_population, run_population, should_stop)
from dcelm.errors import InvalidInputError, NumericError


def test_search_space_validation():
    with pytest.raises(InvalidInputError):
        SearchSpace(np.array([0.0, 1.0]), np.array([1.0, 1.0]))
    with pytest.raises(InvalidInputError):
        SearchSpace(np.array([0.0]), np.array([1.0, 2.0]))
    s = SearchSpace.box(3, -2.0, 5.0)
    assert s.dim == 3
    np.testing.assert_array_equal(s.width, [7.0, 7.0, 7.0])


def test_config_defaults_and_validation():
    cfg = OptimizerConfig()
    assert (cfg.population, cfg.max_iters, cfg.target_loss) == (50, 10, None)
    assert cfg.chaos_map.value == "gauss"
    with pytest.raises(InvalidInputError):
        OptimizerConfig(population=3)
    with pytest.raises(InvalidInputError):
        OptimizerConfig(max_iters=0)
    assert OptimizerConfig(chaos_map="sine").chaos_map.value == "sine"


def test_init_population_in_bounds_and_deterministic():
    space = SearchSpace.box(2, 0.0, 1.0)
    p = init_population(space, 3, 11)
    assert p.shape == (3, 2)
    assert np.all((p >= 0) & (p <= 1))
    np.testing.assert_array_equal(p, init_population(space, 3, 11))


def test_init_population_degenerate_interval():
    eps = 1e-13
    space = SearchSpace(np.full(4, 5.0), np.full(4, 5.0 + eps))
    p = init_population(space, 10, 0)
    assert np.all(np.abs(p - 5.0) <= 1e-12)


def test_clamp_examples():
    space = SearchSpace.box(2, 0.0, 1.0)
    np.testing.assert_array_equal(clamp(space, [-3.0, 7.0]), [0.0, 1.0])
    np.testing.assert_array_equal(clamp(space, [0.2, 0.9]), [0.2, 0.9])
    with pytest.raises(InvalidInputError):
        clamp(space, [1.0, 2.0, 3.0])


@given(st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=3))
def test_clamp_idempotent(v):
    space = SearchSpace.box(3, -1.0, 2.0)
    once = clamp(space, v)
    np.testing.assert_array_equal(clamp(space, once), once)
    assert np.all((once >= -1.0) & (once <= 2.0))


def test_should_stop():
    cfg = OptimizerConfig(max_iters=5, target_loss=0.1)
    assert should_stop(cfg, 5, 1.0)
    assert should_stop(cfg, 1, 0.1 - 1e-9)
    assert not should_stop(OptimizerConfig(max_iters=5), 2, 0.0)


def test_evaluate_rejects_non_finite():
    with pytest.raises(NumericError, match="candidate 1"):
        evaluate(lambda v: float("nan") if v[0] > 0 else 0.0, np.array([[-1.0], [1.0]]))


def test_evaluate_parallel_matches_serial():
    pts = np.random.default_rng(0).normal(size=(30, 4))
    f = lambda v: float(np.sum(v**2))  # noqa: E731
    np.testing.assert_array_equal(evaluate(f, pts, 1), evaluate(f, pts, 4))


def test_tracker_keeps_best():
    tr = Tracker()
    tr.observe(np.array([[1.0], [2.0]]), np.array([3.0, 1.0]))
    tr.end_iteration()
    tr.observe(np.array([[5.0]]), np.array([2.0]))
    tr.end_iteration()
    out = tr.finish()
    assert out.best_losses == [1.0, 1.0]
    assert out.best_position.tolist() == [2.0]
    assert out.evaluations == 3


def test_run_population_counts_evaluations():
    def step(pop, losses, rng, space, scored, t, T):
        new = clamp(space, pop + rng.normal(size=pop.shape))
        return new, scored(new)

    cfg = OptimizerConfig(population=6, max_iters=4, seed=1)
    tr = run_population(step, SearchSpace.box(2, -1, 1), lambda v: float(v @ v), cfg)
    assert tr.iterations == 4
    assert tr.evaluations == 6 * 5
    assert all(a >= b for a, b in zip(tr.best_losses, tr.best_losses[1:]))


def test_run_population_target_loss_stops_early():
    def step(pop, losses, rng, space, scored, t, T):
        return pop, scored(pop)

    cfg = OptimizerConfig(population=4, max_iters=50, target_loss=1e9)
    tr = run_population(step, SearchSpace.box(1, -1, 1), lambda v: 0.0, cfg)
    assert tr.iterations == 0
