from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lyapfit.errors import SmoothnessError
from lyapfit.kernel import WendlandKernel, kernel_eval, poly_eval, radial_derivatives, wendland_poly

F = Fraction


def expand(factor, *polys):
    """Product of ascending-coefficient polynomials, times a scalar."""
    out = [F(factor)]
    for p in polys:
        res = [F(0)] * (len(out) + len(p) - 1)
        for i, a in enumerate(out):
            for j, b in enumerate(p):
                res[i + j] += a * F(b)
        out = res
    return tuple(out)


def test_base_case():
    assert wendland_poly(1, 0) == (F(1), F(-1))
    K = WendlandKernel(1, 0)
    assert K(0.0, 0.0) == 1.0
    assert K(0.0, 1.0) == 0.0


def test_psi_21_closed_form():
    assert wendland_poly(2, 1) == (F(1, 12), F(0), F(-1, 2), F(2, 3), F(-1, 4))


def test_psi_31_coefficientwise():
    one_minus = (1, -1)
    expected = expand(F(1, 20), one_minus, one_minus, one_minus, one_minus, (1, 4))
    assert wendland_poly(3, 1) == expected
    assert WendlandKernel(1, 1, l=3).kappa2 == 1 / 20


def test_exact_rational_evaluation():
    # psi_{2,1}(1/2) evaluated exactly
    exact = poly_eval(wendland_poly(2, 1), F(1, 2))
    assert exact == F(1, 12) - F(1, 8) + F(1, 12) - F(1, 64)
    K = WendlandKernel(1, 1, l=2)
    assert kernel_eval(K, 0.0, 0.5) == pytest.approx(float(exact), rel=1e-15)


def test_compact_support():
    K = WendlandKernel(2, 2, c=2.0)
    assert K(np.zeros(2), np.array([0.5, 0.0])) == 0.0
    assert radial_derivatives(K, 0.6) == (0.0, 0.0, 0.0)


def test_diagonal_is_kappa2():
    K = WendlandKernel(3, 2, c=0.4)
    x = np.array([0.3, -1.0, 2.0])
    assert K(x, x) == K.kappa2


def _fd(f, r, h=1e-5):
    """Five-point central difference of an exact rational function."""
    r, h = F(r), F(h)
    return (-f(r + 2 * h) + 8 * f(r + h) - 8 * f(r - h) + f(r - 2 * h)) / (12 * h)


@pytest.mark.parametrize("d,k", [(1, 2), (2, 2), (2, 3), (3, 2)])
def test_derivatives_match_finite_differences(d, k):
    K = WendlandKernel(d, k)
    psi = lambda r: poly_eval(K.poly, r)
    psi1 = lambda r: poly_eval(K.psi1_poly, r)
    radii = np.random.default_rng(0).uniform(0.01, 0.99, 50)
    for r in radii:
        _, p1, p2 = radial_derivatives(K, r)
        assert p1 == pytest.approx(float(_fd(psi, r) / F(r)), rel=1e-6)
        assert p2 == pytest.approx(float(_fd(psi1, r) / F(r)), rel=1e-6)


def test_psi1_at_origin_is_polynomial_limit():
    K = WendlandKernel(1, 1, l=3)
    _, p1, _ = radial_derivatives(K, 0.0)
    # psi'(r)/r near 0 from a central difference of psi
    r = 1e-4
    fd = (float(poly_eval(K.poly, F(r) + F(1, 10**8))) - float(poly_eval(K.poly, F(r) - F(1, 10**8)))) / 2e-8
    assert p1 == pytest.approx(fd / r, rel=1e-3)
    assert np.isfinite(p1)


def test_scaled_derivatives_chain_rule():
    c = 2.5
    K, K1 = WendlandKernel(2, 2, c=c), WendlandKernel(2, 2)
    r = 0.17
    base = radial_derivatives(K1, c * r)
    scaled = radial_derivatives(K, r)
    assert scaled[0] == pytest.approx(base[0])
    assert scaled[1] == pytest.approx(c**2 * base[1])
    assert scaled[2] == pytest.approx(c**4 * base[2])


def test_gradient_antisymmetry():
    K = WendlandKernel(2, 2, c=0.8)
    x, y = np.array([0.2, -0.4]), np.array([-0.3, 0.5])
    _, p1, _ = radial_derivatives(K, np.linalg.norm(x - y))
    assert np.allclose(p1 * (x - y), -(p1 * (y - x)))
    # finite-difference gradient in x
    h = 1e-6
    g = [(K(x + h * e, y) - K(x - h * e, y)) / (2 * h) for e in np.eye(2)]
    assert np.allclose(g, p1 * (x - y), rtol=1e-6)


def test_smoothness_guard():
    K = WendlandKernel(2, 1)
    with pytest.raises(SmoothnessError):
        radial_derivatives(K, 0.1, order=2)
    assert radial_derivatives(K, 0.1)[2] is None


def test_invalid_parameters():
    with pytest.raises(ValueError):
        WendlandKernel(2, 1, l=1)
    with pytest.raises(ValueError):
        WendlandKernel(0, 1)
    with pytest.raises(ValueError):
        WendlandKernel(2, 1, c=0.0)


def test_roundtrip_dict():
    K = WendlandKernel(2, 3, c=0.3)
    assert WendlandKernel.from_dict(K.to_dict()) == K


@settings(max_examples=40, deadline=None)
@given(d=st.integers(1, 3), k=st.integers(0, 3), n=st.integers(2, 12), seed=st.integers(0, 2**31))
def test_gram_positive_definite(d, k, n, seed):
    pts = np.random.default_rng(seed).random((n, d))
    if n > 1:
        gaps = np.linalg.norm(pts[:, None] - pts[None], axis=-1)[np.triu_indices(n, 1)]
        if gaps.min() < 1e-3:
            return
    A = WendlandKernel(d, k, c=1.0).matrix(pts)
    np.linalg.cholesky(A)


@settings(max_examples=40, deadline=None)
@given(s=st.floats(0.0, 2.0))
def test_factored_profile_matches_exact(s):
    K = WendlandKernel(2, 2)
    exact = float(poly_eval(K.poly, F(s))) if s < 1 else 0.0
    assert K.profiles[0](np.array(s)) == pytest.approx(exact, abs=1e-15, rel=1e-12)
