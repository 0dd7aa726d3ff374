import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from treegreen import BoundaryCondition, Coefficients, build_tree, delta_matrix, fundamental_basis, standard_functionals
from treegreen.conditions import (
    BoundaryFunctional,
    Continuity,
    DeltaMatrix,
    FluxSum,
    Trace,
    apply,
    basis_traces,
    check_nondegenerate,
)
from treegreen.errors import IncompleteTrace, MissingBoundarySpec

from conftest import interval, ytree


def kinds(fs):
    return [type(f).__name__ for f in fs]


def test_functional_counts(y_tree):
    fs = standard_functionals(y_tree)
    assert len(fs) == 6
    assert kinds(fs).count("Continuity") == 2 and kinds(fs).count("FluxSum") == 1
    assert kinds(standard_functionals(interval())) == ["BoundaryFunctional"] * 2
    path = build_tree(["a", "m", "b"], [("e0", "a", "m", 1.0), ("e1", "m", "b", 1.0)])
    assert sorted(kinds(standard_functionals(path))) == sorted(
        ["BoundaryFunctional", "BoundaryFunctional", "Continuity", "FluxSum"])


def test_functional_order(y_tree):
    fs = standard_functionals(y_tree, {"b2": "neumann"})
    # nodes sorted: b1, b2, n, phi
    assert fs[0] == BoundaryFunctional("b1", "e1", BoundaryCondition.dirichlet())
    assert fs[1].condition.kind == "neumann"
    assert fs[2] == Continuity("n", "e0", "e1") and fs[3] == Continuity("n", "e1", "e2")
    assert isinstance(fs[4], FluxSum) and fs[4].edges == ("e0", "e1", "e2")


def test_missing_and_misplaced_specs(y_tree):
    with pytest.raises(MissingBoundarySpec):
        standard_functionals(y_tree, {"n": "dirichlet"})
    with pytest.raises(MissingBoundarySpec):
        standard_functionals(y_tree, {"phi": "dirichlet"}, default=None)


def test_boundary_condition_coercion():
    assert BoundaryCondition.coerce(("robin", 1, 2)) == BoundaryCondition("robin", 1.0, 2.0)
    assert BoundaryCondition.coerce({"robin": [0, 1]}).beta == 1.0
    with pytest.raises(ValueError):
        BoundaryCondition.robin(0, 0)
    with pytest.raises(ValueError):
        BoundaryCondition.coerce("periodic")


def test_apply_examples(y_tree):
    t = interval()
    tr = Trace.from_edge_values(t, {"e": (0.0, 1.0, 1.0, 1.0, 1.0, 1.0)})  # f(x) = x
    assert apply(BoundaryFunctional("b", "e", BoundaryCondition.dirichlet()), tr) == 1.0
    assert apply(BoundaryFunctional("b", "e", BoundaryCondition.neumann()), tr) == -1.0
    assert apply(BoundaryFunctional("b", "e", BoundaryCondition.robin(2, 3)), tr) == -1.0

    # slopes -1, +2, -1 out of n into e0, e1, e2; e0 enters n at its head
    tr = Trace.from_edge_values(y_tree, {
        "e0": (0.0, 1.0, 1.0, 1.0, 1.0, 1.0),
        "e1": (1.0, 2.0, 2.0, 3.0, 2.0, 2.0),
        "e2": (1.0, -1.0, -1.0, 0.0, -1.0, -1.0),
    })
    assert apply(FluxSum("n", ("e0", "e1", "e2"), (1.0, 1.0, 1.0)), tr) == 0.0
    assert apply(Continuity("n", "e0", "e1"), tr) == 0.0
    assert apply(Continuity("n", "e1", "e2"), tr) == 0.0


def test_incomplete_trace(y_tree):
    tr = Trace.from_edge_values(y_tree, {"e0": (0, 0, 0, 0, 0, 0)})
    with pytest.raises(IncompleteTrace):
        apply(Continuity("n", "e0", "e1"), tr)


def test_delta_interval_dirichlet(unit_interval):
    c = Coefficients(unit_interval)
    d = delta_matrix(fundamental_basis(unit_interval, c), standard_functionals(unit_interval), c)
    assert np.allclose(d.matrix, [[1, 0], [1, 1]], atol=1e-14)
    rep = check_nondegenerate(d)
    assert rep.nondegenerate and rep.det == pytest.approx(1.0)


def test_delta_neumann_degenerate(unit_interval):
    c = Coefficients(unit_interval)
    fs = standard_functionals(unit_interval, {"a": "neumann", "b": "neumann"})
    d = delta_matrix(fundamental_basis(unit_interval, c), fs, c)
    assert d.det == pytest.approx(0.0, abs=1e-14)
    assert not check_nondegenerate(d).nondegenerate


def test_delta_ytree(y_tree):
    c = Coefficients(y_tree)
    d = delta_matrix(fundamental_basis(y_tree, c), standard_functionals(y_tree), c)
    assert abs(d.det) == pytest.approx(3.0, rel=1e-12)
    assert check_nondegenerate(d).nondegenerate


def test_identity_nondegenerate():
    d = DeltaMatrix(np.eye(4))
    assert check_nondegenerate(d).nondegenerate and d.det == 1.0 and d.rcond == 1.0


def test_solve_counter():
    d = DeltaMatrix(np.eye(3) * 2)
    assert np.allclose(d.solve([2, 4, 6]), [1, 2, 3])
    d.solve(np.ones(3))
    assert d.solves == 2


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6))
def test_linearity(a):
    t = ytree((1.0, 0.5, 1.5))
    c = Coefficients(t, p="1 + 0.2*x", q="1", rho={"e0": 1.0, "e1": 2.0, "e2": 0.5})
    b = fundamental_basis(t, c)
    fs = standard_functionals(t, {"b1": ("robin", 1.0, 0.3)}, c)
    d = delta_matrix(b, fs, c)
    a = np.array(a)
    values = {}
    for e in t.edges:
        f0, d0, g0 = b.combine(a, e.id, 0.0)
        f1, d1, g1 = b.combine(a, e.id, e.length)
        values[e.id] = (f0, d0, g0, f1, d1, g1)
    tr = Trace.from_edge_values(t, values)
    got = np.array([apply(fn, tr, c) for fn in fs])
    assert np.max(np.abs(got - d.matrix @ a)) <= 1e-10 * (1 + np.max(np.abs(a)))


@pytest.mark.parametrize("rename", [
    {"phi": "z", "n": "a", "b1": "m", "b2": "b"},
    {"phi": 3, "n": 0, "b1": 2, "b2": 1},
])
def test_permutation_invariance(rename):
    def build(names):
        t = build_tree(list(names.values()), [
            ("e0", names["phi"], names["n"], 1.0),
            ("e1", names["n"], names["b1"], 0.6),
            ("e2", names["n"], names["b2"], 1.4),
        ])
        c = Coefficients(t, q="1 + x", rho={"e0": 1.0, "e1": 2.0, "e2": 3.0})
        fs = standard_functionals(t, {names["b2"]: "neumann"}, c)
        return delta_matrix(fundamental_basis(t, c), fs, c)

    d0 = build({k: k for k in rename})
    d1 = build(rename)
    assert abs(d1.det) == pytest.approx(abs(d0.det), rel=1e-12)
    assert check_nondegenerate(d0).nondegenerate == check_nondegenerate(d1).nondegenerate


def test_basis_traces_count(y_tree):
    assert len(basis_traces(fundamental_basis(y_tree, Coefficients(y_tree)))) == 6
