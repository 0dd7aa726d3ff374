import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from treegreen import Coefficients, fundamental_basis, integrate_edge
from treegreen.edgeode import eval as eval_edge
from treegreen.errors import OutOfDomain, StepSizeUnderflow
from treegreen.quadrature import integrate

from conftest import interval, ytree


def test_linear_exact(unit_interval):
    s = integrate_edge("e", Coefficients(unit_interval), (0.0, 1.0))
    f, d, g = eval_edge(s, 0.5)
    assert (f, d, g) == pytest.approx((0.5, 1.0, 1.0), abs=1e-14)
    xs = np.linspace(0, 1, 50)
    f, _, g = eval_edge(s, xs)
    assert np.max(np.abs(f - xs)) <= 1e-14 and np.max(np.abs(g - 1)) <= 1e-14


def test_sinh(unit_interval):
    s = integrate_edge("e", Coefficients(unit_interval, q="1"), (0.0, 1.0))
    assert eval_edge(s, 1.0)[0] == pytest.approx(math.sinh(1.0), abs=1e-9)
    assert eval_edge(s, 0.5)[0] == pytest.approx(0.5210953055, abs=1e-9)
    xs = np.linspace(0, 1, 101)
    f, d, _ = eval_edge(s, xs)
    assert np.max(np.abs(f - np.sinh(xs))) <= 1e-9
    assert np.max(np.abs(d - np.cosh(xs))) <= 1e-9


def test_constant_in_kernel(unit_interval):
    s = integrate_edge("e", Coefficients(unit_interval, p="exp(-x)"), (1.0, 0.0))
    f, d, _ = eval_edge(s, np.linspace(0, 1, 21))
    assert np.allclose(f, 1.0, atol=1e-14) and np.allclose(d, 0.0, atol=1e-14)


def test_endpoint_is_final_state(unit_interval):
    s = integrate_edge("e", Coefficients(unit_interval, q="1 + x"), (1.0, 0.5))
    f, _, g = eval_edge(s, 1.0)
    assert (f, g) == tuple(s.final)


def test_out_of_domain(unit_interval):
    s = integrate_edge("e", Coefficients(unit_interval), (0.0, 1.0))
    with pytest.raises(OutOfDomain):
        eval_edge(s, 1.5)


def test_step_underflow(unit_interval):
    # finite-time blowup of nothing linear; force it with a huge q
    with pytest.raises(StepSizeUnderflow):
        integrate_edge("e", Coefficients(unit_interval, q="1e300"), (1.0, 0.0), tol=1e-10)


def test_basis_structure(y_tree):
    b = fundamental_basis(y_tree, Coefficients(y_tree))
    assert len(b.solutions) * 2 == 6
    for i, e in enumerate(y_tree.edges):
        assert b.columns(e.id) == (2 * i, 2 * i + 1)
        xs = np.linspace(0, 1, 11)
        assert np.allclose(b.evaluate(2 * i + 1, e.id, xs)[0], xs, atol=1e-14)
        assert np.allclose(b.evaluate(2 * i, e.id, xs)[0], 1.0, atol=1e-14)
        other = y_tree.edges[(i + 1) % 3].id
        assert np.all(b.evaluate(2 * i, other, xs)[0] == 0.0)


def test_basis_cosh():
    t = interval(1.7)
    b = fundamental_basis(t, Coefficients(t, q="1"))
    assert b.evaluate(0, "e", 1.7)[0] == pytest.approx(math.cosh(1.7), rel=1e-9)


def test_basis_initial_derivative_with_variable_p():
    t = interval()
    b = fundamental_basis(t, Coefficients(t, p="2 + x"))
    f, d, g = b.evaluate(1, "e", 0.0)
    assert (f, d, g) == pytest.approx((0.0, 1.0, 2.0), abs=1e-15)


def test_wronskian_constant():
    t = interval(2.0)
    c = Coefficients(t, p="1 + x^2", q="2 + sin(3*x)")
    b = fundamental_basis(t, c)
    xs = np.linspace(0, 2, 100)
    f0, _, g0 = b.evaluate(0, "e", xs)
    f1, _, g1 = b.evaluate(1, "e", xs)
    w = f0 * g1 - f1 * g0
    assert np.max(np.abs(w - w[0])) <= 1e-8 * (1 + abs(w[0]))


def test_lagrange_identity():
    # f = sin(x) + 2, g = x^2 + 1 with p = 1 + x, q = 1; L f, L g computed by hand
    p = lambda x: 1 + x
    f, df, d2f = (lambda x: np.sin(x) + 2), np.cos, (lambda x: -np.sin(x))
    g, dg, d2g = (lambda x: x**2 + 1), (lambda x: 2 * x), (lambda x: 2.0 + 0 * x)
    Lf = lambda x: -(df(x) + p(x) * d2f(x)) + f(x)
    Lg = lambda x: -(dg(x) + p(x) * d2g(x)) + g(x)
    lhs = integrate(lambda x: f(x) * Lg(x) - g(x) * Lf(x), 0.0, 1.0, rtol=1e-13)
    pw = lambda x: p(x) * (f(x) * dg(x) - g(x) * df(x))
    assert lhs + (pw(1.0) - pw(0.0)) == pytest.approx(0.0, abs=1e-12)


def test_order_at_least_four(unit_interval):
    c = Coefficients(unit_interval, q="1")
    errs = []
    for h in (0.2, 0.1, 0.05):
        s = integrate_edge("e", c, (0.0, 1.0), tol=1.0, atol=1.0, max_step=h)
        errs.append(abs(eval_edge(s, 1.0)[0] - math.sinh(1.0)))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates >= 4.0)


def test_tolerance_convergence(unit_interval):
    c = Coefficients(unit_interval, q="4")
    exact = math.sinh(2.0) / 2.0
    err = [abs(eval_edge(integrate_edge("e", c, (0.0, 1.0), tol=t, atol=1e-16), 1.0)[0] - exact)
           for t in (1e-6, 1e-8, 1e-10)]
    assert err[0] > err[1] > err[2]
    assert err[2] <= 1e-9 * exact


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(0.0, 4.0), st.floats(0.2, 3.0))
def test_property_constant_coefficients(p, q, length):
    t = interval(length)
    s = integrate_edge("e", Coefficients(t, p=repr(p), q=repr(q)), (1.0, 0.0))
    k = math.sqrt(q / p)
    xs = np.linspace(0, length, 13)
    exact = np.cosh(k * xs)
    assert np.max(np.abs(eval_edge(s, xs)[0] - exact)) <= 1e-8 * np.max(exact)
