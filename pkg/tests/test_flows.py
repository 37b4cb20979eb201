# tests/test_flows.py
import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from slicekit.dataio import Image
from slicekit.errors import InvalidArgumentError, ProblemTooLargeError
from slicekit.experiments import synthetic_image_pair
from slicekit.flows import (FlowConfig, euler_flow, exact_w2, high_l_sw, histogram_tv, match_pixel_count,
                            style_transfer)
from slicekit.methods import FixedSelector
from slicekit.ot1d import sw_estimate
from slicekit.selectors import SelectorConfig
from slicekit.sphere import sample_uniform


# --- FlowConfig ---

@pytest.mark.parametrize("bad", [
    dict(steps=0), dict(step_size=0.0), dict(p=1.0), dict(gradient_mode="sw1"), dict(eval="w1"),
    dict(steps=50, checkpoints=(10, 60)),
])
def test_flow_config_validation(bad):
    with pytest.raises(InvalidArgumentError):
        FlowConfig(**bad)


def test_style_transfer_defaults():
    cfg = FlowConfig.for_style_transfer()
    assert (cfg.steps, cfg.step_size, cfg.eval) == (1000, 1.0, "sw-highL")
    assert cfg.gradient_mode == "sw2-squared"
    assert FlowConfig.for_style_transfer(L=10).L == 10


def test_checkpoints_are_sorted_and_unique():
    assert FlowConfig(steps=10, checkpoints=(10, 5, 5)).checkpoints == (5, 10)


# --- metrics ---

def test_exact_w2_of_a_translation(rng):
    X = rng.standard_normal((100, 3))
    shift = np.array([0.3, -0.4, 1.2])
    assert exact_w2(X, X) == 0.0
    assert exact_w2(X, X + shift) == pytest.approx(np.linalg.norm(shift))


def test_exact_w2_guard(rng):
    X = rng.standard_normal((20, 3))
    with pytest.raises(ProblemTooLargeError):
        exact_w2(X, X, max_points=10)


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_exact_w2_matches_brute_force_on_three_points(seed):
    rng = np.random.default_rng(seed)
    X, Y = rng.standard_normal((3, 2)), rng.standard_normal((3, 2))
    best = min(np.mean(np.sum((X - Y[list(perm)]) ** 2, axis=1)) for perm in itertools.permutations(range(3)))
    assert exact_w2(X, Y) == pytest.approx(np.sqrt(best), rel=1e-12)


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_sliced_distance_never_exceeds_w2(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((30, 3))
    Y = rng.standard_normal((30, 3)) * 0.5 + 1.0
    dirs = sample_uniform(rng, 3, 25)
    assert sw_estimate(X, Y, dirs).distance <= exact_w2(X, Y) * (1 + 1e-9)


def test_high_l_sw_is_seeded(rng):
    X = rng.standard_normal((50, 3))
    assert high_l_sw(X, X + 1.0, L=500) == high_l_sw(X, X + 1.0, L=500)
    assert high_l_sw(X, X, L=500) == 0.0


# --- flows ---

def test_identical_clouds_stop_immediately(rng):
    X = rng.standard_normal((64, 3))
    trace = euler_flow(X, X.copy(), "SW", SelectorConfig(L=20), FlowConfig(steps=20, L=20, checkpoints=(10, 20)), rng)
    assert trace.stopped_at == 0
    assert [r.step for r in trace.records] == [10, 20]
    assert all(r.metric == 0.0 for r in trace.records)


def test_single_slice_flow_contracts_geometrically(rng):
    X = np.array([[1.0, 0.0, 0.0]])
    Y = np.zeros((1, 3))
    cfg = FlowConfig(steps=500, L=1, gradient_mode="sw2-squared", checkpoints=(100, 200, 300, 400, 500))
    trace = euler_flow(X, Y, FixedSelector(np.array([[1.0, 0.0, 0.0]])), SelectorConfig(L=1), cfg, rng)
    metrics = [r.metric for r in trace.records]
    assert all(later < earlier for earlier, later in zip(metrics, metrics[1:]))
    # Each step multiplies the residual by 1 - 2 * step_size
    assert trace.final[0, 0] == pytest.approx(0.98 ** 500, rel=1e-9)
    assert metrics[-1] < 1e-3


def test_flow_records_every_checkpoint(flow_clouds, rng):
    X, Y = flow_clouds
    cfg = FlowConfig(steps=30, L=20, checkpoints=(10, 20, 30))
    trace = euler_flow(X[:128], Y[:128], "RCQSW", SelectorConfig(L=20), cfg, rng)
    assert list(trace.metrics()) == [10, 20, 30]
    seconds = [r.seconds for r in trace.records]
    assert seconds == sorted(seconds)
    assert trace.final.shape == (128, 3)


def test_flow_reduces_w2_with_fixed_directions(flow_clouds, rng):
    X, Y = flow_clouds
    dirs = sample_uniform(np.random.default_rng(3), 3, 50)
    cfg = FlowConfig(steps=100, L=50, checkpoints=(1, 100))
    trace = euler_flow(X[:256], Y[:256], FixedSelector(dirs), SelectorConfig(L=50), cfg, rng)
    first, last = trace.records[0].metric, trace.records[-1].metric
    assert last < first


def test_flow_is_deterministic(flow_clouds):
    X, Y = flow_clouds
    cfg = FlowConfig(steps=20, L=10, checkpoints=(20,))
    runs = [euler_flow(X[:64], Y[:64], "BOSW", SelectorConfig(L=10, batch=2, init_size=4), cfg,
                       np.random.default_rng(5)) for _ in range(2)]
    np.testing.assert_array_equal(runs[0].final, runs[1].final)
    assert runs[0].records[0].evaluations == 10


@pytest.mark.slow
@pytest.mark.parametrize("method,selector", [
    ("SW", SelectorConfig()),
    ("RCQSW", SelectorConfig()),
    ("ARBOSW", SelectorConfig(refresh_period=5)),
])
def test_flow_converges(flow_clouds, method, selector):
    X, Y = flow_clouds
    trace = euler_flow(X, Y, method, selector, FlowConfig(), np.random.default_rng(0))
    metrics = trace.metrics()
    assert metrics[500] <= 1e-2 * metrics[100]


@pytest.mark.slow
def test_fixed_qsw_flow_does_not_diverge(flow_clouds):
    X, Y = flow_clouds
    metrics = euler_flow(X, Y, "CQSW", SelectorConfig(), FlowConfig(), np.random.default_rng(0)).metrics()
    assert metrics[500] <= metrics[100]


@pytest.mark.slow
def test_refreshed_hybrid_beats_one_shot_bo(flow_clouds):
    X, Y = flow_clouds
    final = {}
    for method in ("BOSW", "ARBOSW", "RCQSW"):
        values = [euler_flow(X, Y, method, SelectorConfig(refresh_period=10), FlowConfig(),
                             np.random.default_rng(seed)).metrics()[500] for seed in range(3)]
        final[method] = np.mean(values)
    assert final["ARBOSW"] <= 2 * final["RCQSW"]
    assert final["BOSW"] > final["ARBOSW"]


# --- style transfer ---

def test_match_pixel_count(rng):
    target = rng.standard_normal((10, 3))
    assert match_pixel_count(target, 10, rng) is target
    assert match_pixel_count(target, 4, rng).shape == (4, 3)
    assert match_pixel_count(target, 25, rng).shape == (25, 3)


def test_histogram_tv():
    a = np.array([[0, 0, 0], [255, 255, 255]], dtype=float)
    assert histogram_tv(a, a) == 0.0
    b = np.array([[0, 0, 0], [0, 255, 255]], dtype=float)
    assert histogram_tv(a, b) == pytest.approx(0.5)


@pytest.mark.slow
def test_style_transfer_matches_the_target_palette():
    src, tgt = synthetic_image_pair(64)
    fcfg = FlowConfig.for_style_transfer(L=10, steps=200, checkpoints=(200,))
    out, trace = style_transfer(src, tgt, "SW", SelectorConfig(L=10), fcfg, np.random.default_rng(0))
    assert (out.width, out.height) == (64, 64)
    assert np.all((out.pixels >= 0) & (out.pixels <= 255))
    np.testing.assert_array_equal(out.pixels, np.rint(out.pixels))
    assert histogram_tv(out.pixels, tgt.pixels) < 0.05


def test_style_transfer_smoke():
    src = Image(4, 4, np.full((16, 3), 100.0))
    tgt = Image(2, 2, np.array([[10.0, 20.0, 30.0]] * 4))
    fcfg = FlowConfig.for_style_transfer(L=5, steps=3, checkpoints=(3,), eval="exact-w2")
    out, _ = style_transfer(src, tgt, "SW", SelectorConfig(L=5), fcfg, np.random.default_rng(0))
    assert out.pixels.shape == (16, 3)


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_style_transfer_onto_itself_is_the_identity(seed):
    rng = np.random.default_rng(seed)
    src = Image(4, 4, rng.integers(0, 256, size=(16, 3)).astype(np.float64))
    fcfg = FlowConfig.for_style_transfer(L=10, steps=5, checkpoints=(5,), eval="exact-w2")
    out, trace = style_transfer(src, Image(4, 4, src.pixels.copy()), "SW", SelectorConfig(L=10), fcfg, rng)
    np.testing.assert_array_equal(out.pixels, src.pixels)
    assert trace.records[-1].metric == 0.0
