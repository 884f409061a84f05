import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from lyapfit.errors import NoCrossingError
from lyapfit.geometry import Box, Sphere
from lyapfit.lyap import PFunction
from lyapfit.testbed import (SYSTEMS, NoiseModel, ReferenceSystem, generate_data, get_system,
                             integrate, oracle_T_flow, oracle_V_flow, oracle_V_quadratic,
                             sample_sites)


@pytest.mark.parametrize("A,Q,P", [
    ([[-1.0]], [[2.0]], [[1.0]]),
    ([[-1.0]], [[1.0]], [[0.5]]),
    (-np.eye(2), np.eye(2), 0.5 * np.eye(2)),
])
def test_quadratic_oracle_examples(A, Q, P):
    assert np.allclose(oracle_V_quadratic(A, Q), P, atol=1e-15)


def test_quadratic_oracle_solves_pde():
    sys_ = get_system("linear2d")
    P = oracle_V_quadratic(sys_.A, np.eye(2))
    x = np.random.default_rng(0).uniform(-1, 1, (50, 2))
    grad = 2 * x @ P
    res = np.einsum("ij,ij->i", grad, x @ sys_.A.T) + np.sum(x * x, axis=1)
    assert np.max(np.abs(res)) <= 1e-12


def test_quadratic_oracle_rejects_unstable():
    with pytest.raises(ValueError):
        oracle_V_quadratic([[1.0]], [[1.0]])


def test_flow_oracle_1d():
    p = PFunction([0.0])
    sys_ = get_system("linear1d")
    assert oracle_V_flow(sys_, p, np.array([1.0])) == pytest.approx(0.5, abs=1e-9)
    assert oracle_V_flow(sys_, p, np.array([0.0])) == 0.0


def test_flow_oracle_error_estimate():
    val, tail = oracle_V_flow(get_system("linear1d"), PFunction([0.0]), np.array([0.7]),
                              return_error=True)
    assert 0 < tail < 1e-9


def test_flow_oracles_agree():
    sys_ = get_system("linear2d")
    x = np.random.default_rng(11).uniform(-1, 1, (20, 2))
    P = oracle_V_quadratic(sys_.A, np.eye(2))
    exact = np.einsum("ij,jk,ik->i", x, P, x)
    assert np.max(np.abs(oracle_V_flow(sys_, PFunction([0, 0]), x) - exact)) <= 1e-6


def test_T_oracle_examples():
    sink = get_system("sink2d")
    gamma = Sphere([0.0, 0.0], 1.0)
    T, theta = oracle_T_flow(sink, gamma, 1.0, 0.0, np.array([np.e, 0.0]), return_theta=True)
    assert theta == pytest.approx(1.0, abs=1e-8) and T == pytest.approx(1.0, abs=1e-8)
    on = np.array([0.6, 0.8])
    assert oracle_T_flow(sink, gamma, 1.0, 0.0, on, return_theta=True) == (0.0, 0.0)
    assert oracle_T_flow(sink, gamma, 1.0, 0.0, np.array([0.0, 0.5])) == pytest.approx(
        np.log(0.5), abs=1e-8)


def test_T_oracle_decreases_toward_equilibrium():
    sys_ = get_system("linear2d")
    gamma = Sphere([0.0, 0.0], 0.5)
    ray = np.outer(np.linspace(0.9, 0.05, 12), [0.6, 0.8])
    T = oracle_T_flow(sys_, gamma, 1.0, 0.0, ray)
    assert np.all(np.diff(T) < 0)


def test_T_oracle_no_crossing():
    sink = get_system("sink2d")
    with pytest.raises(NoCrossingError):
        oracle_T_flow(sink, Sphere([0.0, 0.0], 1.0), 1.0, 0.0, np.zeros(2), t_max=1.0)


def test_rk4_order():
    A = get_system("linear2d").A
    f = lambda x: x @ A.T
    x0 = np.array([[0.8, -0.3]])
    exact = x0 @ expm(A).T
    e1 = np.abs(integrate(f, x0, 1.0, 0.1) - exact).max()
    e2 = np.abs(integrate(f, x0, 1.0, 0.05) - exact).max()
    assert 12 < e1 / e2 < 20


def test_noise_free_data():
    sys_ = get_system("nonlinear2d")
    sites = sample_sites(sys_.box, 30, seed=1)
    z = generate_data(sys_, sites, NoiseModel(sigma=0.0))
    assert np.array_equal(z.y, sys_(sites))


@pytest.mark.parametrize("family", ["gaussian", "uniform"])
def test_noise_statistics(family):
    sys_ = get_system("linear1d")
    sites = np.zeros((10_000, 1))
    z = generate_data(sys_, sites, NoiseModel(family, 0.1, seed=4))
    eta = z.y[:, 0]
    assert abs(eta.mean()) < 0.01
    assert eta.var() == pytest.approx(0.01, rel=0.1)


def test_data_deterministic():
    sys_ = get_system("linear2d")
    sites = sample_sites(sys_.box, 50, seed=7)
    a = generate_data(sys_, sites, NoiseModel(sigma=0.05, seed=7))
    b = generate_data(sys_, sample_sites(sys_.box, 50, seed=7), NoiseModel(sigma=0.05, seed=7))
    assert a.y.tobytes() == b.y.tobytes()


@pytest.mark.parametrize("design", ["random", "sobol", "grid"])
def test_site_designs_inside_box(design):
    box = Box([-1.0, 0.0], [1.0, 2.0])
    x = sample_sites(box, 16, seed=0, design=design)
    assert x.shape == (16, 2) and np.all(box.contains(x))


def test_systems_are_stable():
    for sys_ in SYSTEMS.values():
        assert sys_.decay_rate > 0
        assert np.allclose(sys_(np.asarray(sys_.xbar)), 0.0)
    with pytest.raises(ValueError):
        ReferenceSystem("bad", 1, lambda x: x, (0.0,), [[1.0]], Box([-1], [1]))
    with pytest.raises(ValueError):
        get_system("nope")


@settings(max_examples=20, deadline=None)
@given(r=st.floats(1.05, 2.5), angle=st.floats(0, 2 * np.pi))
def test_T_oracle_log_radius(r, angle):
    x = r * np.array([np.cos(angle), np.sin(angle)])
    T = oracle_T_flow(get_system("sink2d"), Sphere([0, 0], 1.0), 1.0, 0.0, x)
    assert T == pytest.approx(np.log(r), abs=1e-8)
