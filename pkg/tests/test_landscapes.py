# tests/test_landscapes.py
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from slicekit.errors import InvalidArgumentError
from slicekit.landscapes import (LandscapeKind, budgeted_search, evaluate, landscape_constants,
                                 load_landscapes)
from slicekit.selectors import SelectorConfig
from slicekit.sphere import sample_uniform

BATCH_ONE = SelectorConfig(batch=1)


@pytest.fixture(scope="module")
def landscapes():
    return load_landscapes()


def test_package_constants_load_normalized(landscapes):
    assert set(landscapes) == set(LandscapeKind)
    target = np.asarray(landscapes[LandscapeKind.QUADRATIC].params["target"])
    assert np.linalg.norm(target) == pytest.approx(1.0)
    for bump in landscapes[LandscapeKind.PEAKS].params["bumps"]:
        assert np.linalg.norm(bump["center"]) == pytest.approx(1.0)


def test_known_maxima(landscapes):
    quad = landscapes[LandscapeKind.QUADRATIC]
    target = np.asarray(quad.params["target"])
    assert evaluate(quad, target) == pytest.approx(3.0)
    assert evaluate(quad, -target) == pytest.approx(3.0)
    ridge = landscapes[LandscapeKind.RIDGE]
    assert evaluate(ridge, np.asarray(ridge.params["direction"])) == pytest.approx(2.5)


def test_landscapes_are_three_dimensional(landscapes):
    with pytest.raises(InvalidArgumentError):
        evaluate(landscapes[LandscapeKind.RIDGE], np.array([1.0, 0.0]))


def test_constants_round_trip_through_json(landscapes, tmp_path):
    path = tmp_path / "landscapes.json"
    path.write_text(json.dumps(landscape_constants(landscapes)))
    reloaded = load_landscapes(str(path))
    np.testing.assert_allclose(reloaded[LandscapeKind.RIDGE].params["direction"],
                               landscapes[LandscapeKind.RIDGE].params["direction"])


@pytest.mark.parametrize("method", ["SW", "GQSW", "CQSW", "RSQSW", "BOSW"])
def test_budgeted_search_respects_the_budget(landscapes, method):
    best = budgeted_search(method, landscapes[LandscapeKind.PEAKS], 10, np.random.default_rng(0), BATCH_ONE)
    assert 0.0 < best <= 2.0 + 1.2 + 1.0 + 0.9


def test_selectors_that_need_a_flow_are_rejected(landscapes, rng):
    with pytest.raises(InvalidArgumentError):
        budgeted_search("ABOSW", landscapes[LandscapeKind.PEAKS], 10, rng)
    with pytest.raises(InvalidArgumentError):
        budgeted_search("SW", landscapes[LandscapeKind.PEAKS], 0, rng)


def test_bo_dominates_qsw_on_the_quadratic(landscapes):
    quad = landscapes[LandscapeKind.QUADRATIC]
    bo = np.mean([budgeted_search("BOSW", quad, 20, np.random.default_rng(s), BATCH_ONE) for s in range(5)])
    for name in ("GQSW", "EQSW", "SQSW", "DQSW", "CQSW"):
        assert bo >= budgeted_search(name, quad, 20, np.random.default_rng(0))


def test_bo_beats_monte_carlo_in_most_trials(landscapes):
    quad = landscapes[LandscapeKind.QUADRATIC]
    wins = 0
    for seed in range(5):
        bo = budgeted_search("BOSW", quad, 15, np.random.default_rng(seed), BATCH_ONE)
        mc = budgeted_search("SW", quad, 15, np.random.default_rng(100 + seed))
        wins += bo >= mc
    assert wins >= 4


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_ridge_and_quadratic_peak_at_their_axes(landscapes, seed):
    dirs = sample_uniform(np.random.default_rng(seed), 3, 64)
    ridge = landscapes[LandscapeKind.RIDGE]
    top = evaluate(ridge, np.asarray(ridge.params["direction"]))
    assert np.all(ridge.evaluate_many(dirs) <= top + 1e-12)
    quad = landscapes[LandscapeKind.QUADRATIC]
    assert np.all(quad.evaluate_many(dirs) <= evaluate(quad, np.asarray(quad.params["target"])) + 1e-12)
