# tests/test_qsw.py
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import qmc

from slicekit.errors import InvalidArgumentError
from slicekit.qsw import (QswKind, RandomizeMode, energy, equal_area_map, gaussian_map, make_qsw,
                          optimize_energy, optimize_energy_trace, sobol, spiral)
from slicekit.sphere import geodesic_distance, normalize


@pytest.mark.parametrize("kind", list(QswKind))
def test_every_kind_gives_unit_directions(kind):
    dirs = make_qsw(kind, 50)
    assert dirs.shape == (50, 3)
    np.testing.assert_allclose(np.linalg.norm(dirs, axis=1), 1.0, atol=1e-9)


@pytest.mark.parametrize("kind", list(QswKind))
def test_deterministic_kinds_are_reproducible(kind):
    np.testing.assert_array_equal(make_qsw(kind, 30), make_qsw(kind, 30))


@pytest.mark.parametrize("kind", [QswKind.EQUAL_AREA_SOBOL, QswKind.GAUSSIAN_SOBOL])
def test_sobol_sets_are_prefix_nested(kind):
    np.testing.assert_array_equal(make_qsw(kind, 16)[:7], make_qsw(kind, 7))


def test_sobol_points_in_unit_cube():
    for method in ("owen", "xor"):
        pts = sobol(100, 5, scramble=17, method=method)
        assert pts.shape == (100, 5)
        assert np.all((pts >= 0) & (pts < 1))


def test_scrambled_sobol_is_seeded():
    np.testing.assert_array_equal(sobol(32, 2, scramble=3), sobol(32, 2, scramble=3))
    assert not np.array_equal(sobol(32, 2, scramble=3), sobol(32, 2, scramble=4))


def test_sobol_dimension_limits():
    with pytest.raises(InvalidArgumentError):
        sobol(8, 1)
    with pytest.raises(InvalidArgumentError):
        sobol(8, 22)


def test_equal_area_map_known_points():
    np.testing.assert_allclose(equal_area_map([0.0, 0.5]), [1.0, 0.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(equal_area_map([0.25, 0.5]), [0.0, 1.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(equal_area_map([0.3, 1.0]), [0.0, 0.0, 1.0], atol=1e-12)


def test_gaussian_map_centre_lands_on_diagonal():
    np.testing.assert_allclose(gaussian_map([0.5, 0.5, 0.5]), np.full(3, 1 / math.sqrt(3)), atol=1e-9)


def test_gaussian_map_clamps_edges():
    out = gaussian_map([[0.0, 0.0, 1.0]])
    assert np.all(np.isfinite(out))


def test_spiral_poles_and_heights():
    pts = spiral(4)
    np.testing.assert_allclose(pts[:, 2], [0.75, 0.25, -0.25, -0.75])


def test_energy_trace_is_monotone():
    points, trace = optimize_energy_trace(spiral(40), "coulomb", iters=200)
    assert all(b <= a for a, b in zip(trace, trace[1:]))
    assert energy(points, "coulomb") < energy(spiral(40), "coulomb")
    np.testing.assert_allclose(np.linalg.norm(points, axis=1), 1.0, atol=1e-12)


def test_distance_energy_improves():
    _, trace = optimize_energy_trace(spiral(30), "distance", iters=100)
    assert trace[-1] <= trace[0]


def test_coincident_init_is_separated():
    init = np.vstack([spiral(5), spiral(5)[:1]])
    points, trace = optimize_energy_trace(init, "coulomb", iters=20)
    assert np.all(np.isfinite(trace))
    assert np.min(np.linalg.norm(points[:, None] - points[None], axis=-1) + np.eye(6) * 10) > 1e-9


def test_rotated_sets_preserve_design_geometry(rng):
    base = make_qsw(QswKind.SPIRAL, 20)
    rotated = make_qsw(QswKind.SPIRAL, 20, RandomizeMode.ROTATE, rng)
    np.testing.assert_allclose(rotated @ rotated.T, base @ base.T, atol=1e-9)


def test_randomized_sets_change_with_the_generator(rng):
    a = make_qsw(QswKind.EQUAL_AREA_SOBOL, 20, RandomizeMode.SCRAMBLE, rng)
    b = make_qsw(QswKind.EQUAL_AREA_SOBOL, 20, RandomizeMode.SCRAMBLE, rng)
    assert not np.array_equal(a, b)


def test_gaussian_sobol_in_higher_dimension(rng):
    dirs = make_qsw(QswKind.GAUSSIAN_SOBOL, 64, RandomizeMode.SCRAMBLE, rng, d=8, scramble_method="xor")
    assert dirs.shape == (64, 8)
    np.testing.assert_allclose(np.linalg.norm(dirs, axis=1), 1.0, atol=1e-9)


def test_invalid_combinations(rng):
    with pytest.raises(InvalidArgumentError):
        make_qsw(QswKind.SPIRAL, 10, RandomizeMode.SCRAMBLE, rng)
    with pytest.raises(InvalidArgumentError):
        make_qsw(QswKind.EQUAL_AREA_SOBOL, 10, d=4)
    with pytest.raises(InvalidArgumentError):
        make_qsw(QswKind.SPIRAL, 10, RandomizeMode.ROTATE, None)
    with pytest.raises(InvalidArgumentError):
        make_qsw(QswKind.SPIRAL, 0)


def test_unscrambled_sobol_starts_at_the_origin():
    for dim in (2, 3, 21):
        np.testing.assert_array_equal(sobol(1, dim)[0], np.zeros(dim))


def test_sobol_is_more_uniform_than_random_points():
    random_points = np.random.default_rng(0).random((1024, 2))
    assert qmc.discrepancy(sobol(1024, 2), method="CD") < qmc.discrepancy(random_points, method="CD")


def test_equal_area_sobol_fills_octants_evenly():
    dirs = equal_area_map(sobol(20000, 2))
    octant = (dirs[:, 0] >= 0) * 4 + (dirs[:, 1] >= 0) * 2 + (dirs[:, 2] >= 0)
    counts = np.bincount(octant, minlength=8)
    expected = 20000 / 8
    sigma = math.sqrt(20000 * (1 / 8) * (7 / 8))
    assert np.all(np.abs(counts - expected) <= 3 * sigma)


@settings(max_examples=20)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_two_charges_end_up_antipodal(seed):
    init = normalize(np.random.default_rng(seed).standard_normal((2, 3)))
    a, b = optimize_energy(init, "coulomb", iters=500)
    assert geodesic_distance(a, b) == pytest.approx(math.pi, abs=1e-3)
