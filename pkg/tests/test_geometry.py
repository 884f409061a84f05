import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lyapfit.errors import DuplicateSiteError, EmptyRegionError
from lyapfit.geometry import (Ball, Box, DomainSpec, Sphere, check_distinct, fill_distance,
                              make_grid, region_from_dict, voronoi_weights, weigh_sites)

UNIT = Box([0.0], [1.0])


def test_weights_two_sites():
    w = voronoi_weights(np.array([[0.25], [0.75]]), UNIT, seed=1)
    assert np.allclose(w, [0.5, 0.5], atol=0.01)


def test_weights_three_sites():
    w = voronoi_weights(np.array([[0.0], [0.5], [1.0]]), UNIT, seed=3)
    assert np.allclose(w, [0.25, 0.5, 0.25], atol=0.01)


def test_single_site_takes_whole_box():
    X = Box([0.0, 0.0], [1.0, 1.0])
    assert voronoi_weights(np.array([[0.3, 0.9]]), X).tolist() == [1.0]


def test_weights_sum_to_volume():
    X = Box([-1.0, -2.0], [1.0, 1.0])
    x = np.random.default_rng(0).uniform([-1, -2], [1, 1], (37, 2))
    assert voronoi_weights(x, X).sum() == pytest.approx(X.volume, rel=1e-15)


def test_weights_deterministic():
    X = Box([0.0, 0.0], [1.0, 1.0])
    x = np.random.default_rng(2).random((20, 2))
    a = weigh_sites(x, X, seed=5)
    b = weigh_sites(x, X, seed=5)
    assert a.w.tobytes() == b.w.tobytes() and a.h_x == b.h_x


def test_weights_input_checks():
    with pytest.raises(ValueError):
        voronoi_weights(np.array([[2.0]]), UNIT)
    with pytest.raises(ValueError):
        voronoi_weights(np.array([[0.1], [0.2]]), UNIT, n_mc=5)
    with pytest.raises(DuplicateSiteError):
        voronoi_weights(np.array([[0.1], [0.1]]), UNIT)


@pytest.mark.parametrize("x,expected", [([[0.5]], 0.5), ([[0.0]], 1.0)])
def test_fill_distance_1d(x, expected):
    assert fill_distance(np.array(x), UNIT) == pytest.approx(expected, abs=1e-12)


def test_fill_distance_grid():
    g = np.linspace(0, 1, 3)
    x = np.stack(np.meshgrid(g, g), axis=-1).reshape(-1, 2)
    h = fill_distance(x, Box([0, 0], [1, 1]), 201**2)
    assert h == pytest.approx(0.25 * np.sqrt(2), abs=1e-12)


def test_fill_distance_with_hole():
    # sites on the rim of the hole cover it; the hole itself is not in the set
    rim = Sphere([0.0, 0.0], 0.5).points(64)
    with_hole = fill_distance(rim, Box([-0.5, -0.5], [0.5, 0.5]), exclude=Ball([0, 0], 0.5))
    without = fill_distance(rim, Box([-0.5, -0.5], [0.5, 0.5]))
    assert with_hole < without == pytest.approx(0.5, abs=1e-3)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), m=st.integers(1, 30))
def test_fill_distance_monotone_in_sites(seed, m):
    X = Box([0.0, 0.0], [1.0, 1.0])
    rng = np.random.default_rng(seed)
    x = rng.random((m, 2))
    extra = np.vstack([x, rng.random((1, 2))])
    assert fill_distance(extra, X, 2500) <= fill_distance(x, X, 2500)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), m=st.integers(1, 40))
def test_weights_partition_property(seed, m):
    X = Box([0.0, -1.0], [2.0, 1.0])
    x = np.random.default_rng(seed).uniform(X.lo, X.hi, (m, 2))
    w = voronoi_weights(x, X, n_mc=1024, seed=seed)
    assert np.all(w >= 0) and w.sum() == pytest.approx(X.volume, rel=1e-15)


def test_grid_excludes_ball():
    pts = make_grid(Box([-1.0], [1.0]), 0.5, exclude=Ball([0.0], 0.3))
    assert pts.ravel().tolist() == [-1.0, -0.5, 0.5, 1.0]


def test_ball_grid_degenerate():
    ball = Ball([0.0, 0.0], 1.0)
    assert make_grid(ball, 2.5).tolist() == [[0.0, 0.0]]
    with pytest.raises(EmptyRegionError):
        make_grid(ball, 2.5, exclude=Ball([0.0, 0.0], 0.1))


def test_sphere_points():
    pts = Sphere([0.0, 0.0], 1.0).points(4)
    assert np.allclose(pts, [[1, 0], [0, 1], [-1, 0], [0, -1]], atol=1e-15)


def test_sphere_level_set():
    S = Sphere([1.0, 0.0], 2.0)
    pts = S.points(17)
    assert np.allclose(S.h(pts), 0.0, atol=1e-12)
    assert np.allclose(np.linalg.norm(pts - [1, 0], axis=1), 2.0)


def test_domain_rejects_gamma_in_excluded_ball():
    with pytest.raises(ValueError):
        DomainSpec(Box([-1, -1], [1, 1]), Box([-1, -1], [1, 1]), (0.0, 0.0), 0.5,
                   Sphere([0.0, 0.0], 0.3))


def test_domain_membership():
    D = DomainSpec(Box([-1, -1], [1, 1]), Box([-1, -1], [1, 1]), (0.0, 0.0), 0.2)
    assert D.in_D(np.array([[0.5, 0.5], [0.1, 0.0], [2.0, 0.0]])).tolist() == [True, False, False]


def test_region_roundtrip():
    for r in (Box([0, 1], [2, 3]), Ball([0.5], 2.0), Sphere([0, 0, 0], 1.5)):
        assert region_from_dict(r.to_dict()) == r


def test_check_distinct():
    check_distinct(np.array([[0.0, 0.0], [1e-11, 0.0]]))
    with pytest.raises(DuplicateSiteError):
        check_distinct(np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 0.0]]))
