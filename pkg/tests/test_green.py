import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from treegreen import Coefficients, GraphPoint
from treegreen.conditions import BoundaryFunctional, Continuity, FluxSum
from treegreen.errors import DegenerateProblem, DiscontinuousP, PointAtNode
from treegreen.green import GreensFunction

from conftest import greens, interval, problem, ytree

P = GraphPoint
ALL = ["interval", "sinh", "ytree", "ytree_rho", "ytree_river", "binary7"]


@pytest.fixture(scope="module")
def built():
    return {name: greens(name) for name in ALL}


# -- psi construction ---------------------------------------------------------

def test_psi_interval():
    t = interval()
    g = GreensFunction(t, Coefficients(t))
    psi = g.psi_for_boundary_node("b")
    xs = np.linspace(0, 1, 11)
    assert np.allclose(psi.evaluate("e", xs)[0], xs, atol=1e-13)
    pair = g.pairs["e"]
    assert pair.lam_scale == pytest.approx(1.0, abs=1e-13)
    assert np.allclose(pair.psi_lambda("e", xs)[0], 1 - xs, atol=1e-13)


def test_psi_ytree_node_value(y_green):
    psi = y_green.psi_for_boundary_node("b1")
    assert psi(P("e0", 1.0)) == pytest.approx(1 / 3, abs=1e-13)
    assert psi(P("e1", 1.0)) == pytest.approx(1.0, abs=1e-13)
    assert psi(P("e0", 0.0)) == pytest.approx(0.0, abs=1e-13)
    assert psi(P("e2", 1.0)) == pytest.approx(0.0, abs=1e-13)
    assert y_green.pairs["e0"].wronskian == pytest.approx(-1.0, abs=1e-12)


@pytest.mark.parametrize("name", ALL)
def test_psi_unit_at_own_node(built, name):
    g = built[name]
    for node, psi in g._psi.items():
        e = g.tree.edge(g.tree.node_class.incidence[node][0])
        row = [f for f in g.functionals if isinstance(f, BoundaryFunctional) and f.node == node][0]
        f, d, _ = psi.evaluate(e.id, e.coord(e.end(node)))
        sign = 1.0 if e.end(node) == 0 else -1.0
        assert row.condition.alpha * f + row.condition.beta * sign * d == pytest.approx(1.0, abs=1e-10)


def test_degenerate_neumann_neumann():
    t = interval()
    with pytest.raises(DegenerateProblem):
        GreensFunction(t, Coefficients(t), {"a": "neumann", "b": "neumann"})


def test_discontinuous_p_rejected(y_tree):
    with pytest.raises(DiscontinuousP):
        GreensFunction(y_tree, Coefficients(y_tree, p={"e0": "1", "e1": "2", "e2": "1"}))


@pytest.mark.parametrize("name", ALL)
def test_normalization(built, name):
    g = built[name]
    for e in g.tree.edges:
        xs = np.linspace(0, e.length, 50)
        assert np.max(np.abs(g.pairs[e.id].pw(xs) + 1.0)) <= 1e-8


# -- kernel values ------------------------------------------------------------

def test_interval_values():
    g = greens("interval")
    assert g(P("e", 0.5), P("e", 0.25)) == pytest.approx(0.125, abs=1e-12)
    for x in np.linspace(0.05, 0.95, 7):
        for y in np.linspace(0, 1, 7):
            assert g(P("e", x), P("e", y)) == pytest.approx(min(x, y) * (1 - max(x, y)), abs=1e-12)


def test_sinh_value():
    g = greens("sinh")
    assert g(P("e", 0.5), P("e", 0.5)) == pytest.approx(math.sinh(0.5) ** 2 / math.sinh(1.0), abs=1e-10)


def test_ytree_value(y_green):
    assert y_green(P("e0", 0.5), P("e1", 0.5)) == pytest.approx(1 / 12, abs=1e-12)


def test_vanishes_at_dirichlet_node(y_green):
    assert y_green(P("e1", 0.3), P("e0", 0.0)) == pytest.approx(0.0, abs=1e-14)
    assert y_green.green_limit("b1", "e1", P("e0", 0.4))[0] == pytest.approx(0.0, abs=1e-14)
    assert y_green(P("e1", 1 - 1e-9), P("e0", 0.4)) == pytest.approx(0.0, abs=1e-9)


def test_x_must_be_interior(y_green):
    with pytest.raises(PointAtNode):
        y_green(P("e0", 0.0), P("e1", 0.5))


def test_kernel_row_matches_pointwise(river_green):
    x = P("e1", 0.3)
    for e in river_green.tree.edges:
        ys = np.linspace(0, e.length, 9)
        row = river_green.kernel_row(x, e.id, ys)
        assert np.allclose(row, [river_green(x, P(e.id, y)) for y in ys], rtol=1e-14, atol=1e-15)


# -- properties of G(., y) ----------------------------------------------------

def _node_residuals(g, y):
    out = []
    for fn in g.functionals:
        if isinstance(fn, Continuity):
            a = g.green_limit(fn.node, fn.edge_a, y)[0]
            b = g.green_limit(fn.node, fn.edge_b, y)[0]
            out.append(b - a)
        elif isinstance(fn, FluxSum):
            out.append(sum(w * g.green_limit(fn.node, e, y)[1] for e, w in zip(fn.edges, fn.weights)))
        else:
            f, d = g.green_limit(fn.node, fn.edge, y)
            out.append(fn.condition.alpha * f + fn.condition.beta * d)
    return np.array(out)


@pytest.mark.parametrize("name", ALL)
def test_node_conditions_of_kernel(built, name):
    g = built[name]
    for e in g.tree.edges:
        for y in (0.3, 0.71):
            assert np.max(np.abs(_node_residuals(g, P(e.id, y * e.length)))) <= 1e-8


@pytest.mark.parametrize("name", ALL)
def test_source_jump(built, name):
    g = built[name]
    for e in g.tree.edges:
        yx = 0.4 * e.length
        y = P(e.id, yx)
        d_plus = g.green_eval_dx(P(e.id, yx + 1e-9), y)[1]
        d_minus = g.green_eval_dx(P(e.id, yx - 1e-9), y)[1]
        p = float(g.coeffs.p[e.id](yx))
        assert p * (d_plus - d_minus) + 1.0 / g.coeffs.rho[e.id] == pytest.approx(0.0, abs=1e-6)


def _random_point(t, rng):
    e = t.edges[rng.integers(len(t.edges))]
    return P(e.id, float(rng.uniform(0.01, 0.99) * e.length))


@pytest.mark.parametrize("name", ALL)
def test_symmetry(built, name):
    g = built[name]
    rng = np.random.default_rng(7)
    for _ in range(40):
        x, y = _random_point(g.tree, rng), _random_point(g.tree, rng)
        assert g(x, y) == pytest.approx(g(y, x), abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["e0", "e1", "e2"]), st.floats(0.02, 0.98), st.sampled_from(["e0", "e1", "e2"]),
       st.floats(0.0, 1.0))
def test_symmetry_property(river_green, ex, xf, ey, yf):
    t = river_green.tree
    x = P(ex, xf * t.edge(ex).length)
    y = P(ey, min(max(yf, 0.02), 0.98) * t.edge(ey).length)
    assert river_green(x, y) == pytest.approx(river_green(y, x), abs=1e-8)


# -- Green operator -----------------------------------------------------------

def test_apply_interval():
    f = greens("interval").green_apply("1")
    xs = np.linspace(0, 1, 11)
    assert np.allclose(f("e", xs), xs * (1 - xs) / 2, atol=1e-12)
    assert f("e", 0.5) == pytest.approx(0.125, abs=1e-12)


def test_apply_zero(y_green):
    f = y_green.green_apply(0.0)
    for e in ("e0", "e1", "e2"):
        assert np.all(f(e, np.linspace(0, 1, 5)) == 0.0)


def test_apply_ytree(y_green):
    f = y_green.green_apply("1")
    assert f("e0", 1.0) == pytest.approx(0.5, abs=1e-10)
    assert f("e0", 0.5) == pytest.approx(0.375, abs=1e-10)


def _flux_residual(g, f, h, e, xs, step=1e-3):
    # -(p f')' + q f - h with a fourth-order central difference of the flux
    flux = lambda x: f.flux(e.id, x)
    dflux = (-flux(xs + 2 * step) + 8 * flux(xs + step) - 8 * flux(xs - step) + flux(xs - 2 * step)) / (12 * step)
    res = -dflux + g.coeffs.q[e.id](xs) * f(e.id, xs) - h[e.id](xs)
    return np.max(np.abs(res)) / max(1.0, np.max(np.abs(h[e.id](xs))))


@pytest.mark.parametrize("name", ["ytree_river", "binary7", "sinh"])
def test_apply_residual_and_functionals(built, name):
    pr = problem(name)
    g = built[name]
    from treegreen.coeffs import as_edge_function
    h = {e: as_edge_function(v) for e, v in pr.rhs.items()}
    f = g.green_apply(pr.rhs)
    for e in g.tree.edges:
        xs = np.linspace(0.05, 0.95, 19) * e.length
        assert _flux_residual(g, f, h, e, xs) <= 1e-6
    assert np.max(np.abs(g.functional_values(f))) <= 1e-8


def test_solve_general_zero_c(y_green):
    a = y_green.green_apply("x")
    b = y_green.solve_general("x", np.zeros(6))
    xs = np.linspace(0, 1, 7)
    for e in ("e0", "e1", "e2"):
        assert np.max(np.abs(a(e, xs) - b(e, xs))) <= 1e-10


def test_solve_general_dirichlet_data():
    g = greens("interval")
    f = g.solve_general(0.0, [0.0, 2.0])
    xs = np.linspace(0, 1, 11)
    assert np.allclose(f("e", xs), 2 * xs, atol=1e-12)


@pytest.mark.parametrize("name", ["ytree_river", "binary7"])
def test_solve_general_hits_c(built, name):
    g = built[name]
    c = np.random.default_rng(3).normal(size=len(g.functionals))
    f = g.solve_general("1 + x", c)
    assert np.max(np.abs(g.functional_values(f) - c)) <= 1e-8


# -- Pokornyi cross-check -----------------------------------------------------

def test_pokornyi_interval():
    g = greens("interval")
    assert g.pokornyi_green(P("e", 0.5), P("e", 0.25)) == pytest.approx(0.125, abs=1e-12)


@pytest.mark.parametrize("name", ["ytree_rho", "ytree_river", "binary7"])
def test_pokornyi_equivalence(built, name):
    g = built[name]
    rng = np.random.default_rng(11)
    for _ in range(30):
        x, y = _random_point(g.tree, rng), _random_point(g.tree, rng)
        assert g.pokornyi_green(x, y) == pytest.approx(g.coeffs.rho[y.edge] * g(x, y), abs=1e-6)


def test_pokornyi_interval_fallback():
    # Dirichlet interval kernel is degenerate for q = -pi^2, the whole problem is not
    t = interval()
    g = GreensFunction(t, Coefficients(t, q=repr(-math.pi**2)), {"b": "neumann"})
    for x, y in [(0.3, 0.6), (0.8, 0.1), (0.5, 0.5)]:
        assert g.pokornyi_green(P("e", x), P("e", y)) == pytest.approx(g(P("e", x), P("e", y)), abs=1e-7)


# -- solve count --------------------------------------------------------------

@pytest.mark.parametrize("name", ALL)
def test_solve_count(name):
    g = greens(name)
    assert g.solve_count == len(g.tree.boundary)
    rng = np.random.default_rng(0)
    for _ in range(50):
        g(_random_point(g.tree, rng), _random_point(g.tree, rng))
    g.green_apply("1")("e0" if "e0" in g.tree.edge_ids else "e", 0.5)
    assert g.solve_count == len(g.tree.boundary)
