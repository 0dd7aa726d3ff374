import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from treegreen.errors import QuadratureFailure
from treegreen.quadrature import integrate, integrate_segments


@pytest.mark.parametrize("f,a,b", [
    (np.sin, 0.0, np.pi),
    (np.sqrt, 0.0, 2.0),
    (lambda x: np.exp(-50 * (x - 0.3) ** 2), 0.0, 1.0),
    (lambda x: np.abs(x - 0.37), 0.0, 1.0),
    (lambda x: 1.0 / (1.0 + 25 * x**2), -1.0, 1.0),
])
def test_against_scipy_quad(f, a, b):
    ref, _ = quad(lambda x: float(f(np.array([x]))[0]), a, b, epsabs=1e-14, epsrel=1e-13, limit=200)
    assert integrate(f, a, b, rtol=1e-12) == pytest.approx(ref, rel=1e-10, abs=1e-13)


def test_reversed_and_empty():
    assert integrate(np.cos, 1.0, 0.0) == pytest.approx(-np.sin(1.0), rel=1e-12)
    assert integrate(np.cos, 0.5, 0.5) == 0.0


def test_segments_cumulative():
    b = np.linspace(0, 2, 9)
    vals, err = integrate_segments(np.cos, b, rtol=1e-12)
    assert np.allclose(np.cumsum(vals), np.sin(b[1:]), atol=1e-13)
    assert err < 1e-10


def test_failure_reported():
    with pytest.raises(QuadratureFailure):
        integrate_segments(lambda x: np.sin(1.0 / (x + 1e-9)), [0.0, 1.0], rtol=1e-14, max_intervals=200)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=8), st.floats(-2, 0), st.floats(0.1, 3))
def test_polynomials_exact(coef, a, width):
    b = a + width
    P = np.polynomial.Polynomial(coef)
    exact = P.integ()(b) - P.integ()(a)
    assert integrate(P, a, b) == pytest.approx(exact, rel=1e-12, abs=1e-12)
