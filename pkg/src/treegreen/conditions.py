"""Node-condition functionals and the matrix ``Delta[i, j] = l_i[phi_j]``.

Every internal node of degree ``k`` contributes ``k - 1`` continuity
functionals and one weighted flux sum; every boundary node contributes one
boundary functional.  The total is always ``2m``.

Derivatives at nodes are *boundary derivatives*: taken out of the node into
the edge, i.e. ``+f'(0)`` at a tail and ``-f'(l)`` at a head.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Hashable, Mapping

import numpy as np
import scipy.linalg
from scipy.linalg import LinAlgWarning
from scipy.linalg.lapack import dgecon

from .coeffs import Coefficients
from .edgeode import FundamentalBasis, eval as eval_edge
from .errors import IncompleteTrace, MissingBoundarySpec
from .graph import HEAD, TAIL, TreeGraph

__all__ = [
    "BoundaryCondition",
    "Continuity",
    "FluxSum",
    "BoundaryFunctional",
    "Trace",
    "DeltaMatrix",
    "NondegeneracyReport",
    "RCOND_THRESHOLD",
    "standard_functionals",
    "apply",
    "basis_traces",
    "delta_matrix",
    "check_nondegenerate",
]

RCOND_THRESHOLD = 1e-12


@dataclass(frozen=True)
class BoundaryCondition:
    """``alpha * f(n) + beta * f'^b(n)`` at a boundary node."""

    kind: str = "dirichlet"
    alpha: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("dirichlet", "neumann", "robin"):
            raise ValueError(f"unknown boundary condition {self.kind!r}")
        if self.kind == "robin" and self.alpha == 0.0 and self.beta == 0.0:
            raise ValueError("robin condition needs (alpha, beta) != (0, 0)")

    @classmethod
    def dirichlet(cls):
        return cls("dirichlet", 1.0, 0.0)

    @classmethod
    def neumann(cls):
        return cls("neumann", 0.0, 1.0)

    @classmethod
    def robin(cls, alpha, beta):
        return cls("robin", float(alpha), float(beta))

    @classmethod
    def coerce(cls, spec) -> "BoundaryCondition":
        if isinstance(spec, cls):
            return spec
        if isinstance(spec, str):
            if spec == "dirichlet":
                return cls.dirichlet()
            if spec == "neumann":
                return cls.neumann()
        if isinstance(spec, (tuple, list)) and len(spec) == 3 and spec[0] == "robin":
            return cls.robin(spec[1], spec[2])
        if isinstance(spec, Mapping) and set(spec) == {"robin"}:
            alpha, beta = spec["robin"]
            return cls.robin(alpha, beta)
        raise ValueError(f"cannot interpret boundary condition {spec!r}")


@dataclass(frozen=True)
class Continuity:
    """``f_{edge_b}(node) - f_{edge_a}(node)``."""

    node: Hashable
    edge_a: Hashable
    edge_b: Hashable


@dataclass(frozen=True)
class FluxSum:
    """``sum_e rho_e f_e'^b(node)`` over the incident edges."""

    node: Hashable
    edges: tuple
    weights: tuple


@dataclass(frozen=True)
class BoundaryFunctional:
    node: Hashable
    edge: Hashable
    condition: BoundaryCondition


class Trace:
    """End values of one function: ``(value, boundary derivative, boundary flux)``
    per ``(edge, end)`` with ``end`` in ``{TAIL, HEAD}``."""

    def __init__(self, tree: TreeGraph, data: Mapping | None = None):
        self.tree = tree
        self.data = dict(data or {})

    def __setitem__(self, key, value):
        self.data[key] = tuple(float(v) for v in value)

    def at(self, node, edge):
        e = self.tree.edge(edge)
        key = (edge, e.end(node))
        try:
            return self.data[key]
        except KeyError:
            raise IncompleteTrace(f"trace has no data for edge {edge!r} at node {node!r}") from None

    def value(self, node, edge) -> float:
        return self.at(node, edge)[0]

    def derivative(self, node, edge) -> float:
        return self.at(node, edge)[1]

    @classmethod
    def from_edge_values(cls, tree, values):
        """Build from ``{edge: (f(0), f'(0), g(0), f(l), f'(l), g(l))}`` in edge
        coordinates; boundary-derivative signs are applied here."""
        tr = cls(tree)
        for eid, (f0, d0, g0, f1, d1, g1) in values.items():
            tr[(eid, TAIL)] = (f0, d0, g0)
            tr[(eid, HEAD)] = (f1, -d1, -g1)
        return tr


def standard_functionals(t: TreeGraph, bc: Mapping | None = None,
                         c: Coefficients | None = None,
                         default: str | None = "dirichlet") -> list:
    """The ``2m`` node functionals in deterministic order.

    Nodes are visited in sorted id order.  An internal node yields its
    continuity functionals (consecutive incident edges sorted by id) followed
    by its flux sum; a boundary node yields its boundary functional.

    ``bc`` maps boundary nodes to conditions (``"dirichlet"``, ``"neumann"``,
    ``("robin", alpha, beta)`` or :class:`BoundaryCondition`).  Nodes not in
    ``bc`` get ``default``; with ``default=None`` they raise
    :class:`MissingBoundarySpec`.
    """
    bc = dict(bc or {})
    nc = t.node_class
    unknown = [n for n in bc if n not in nc.boundary]
    if unknown:
        raise MissingBoundarySpec(f"boundary conditions given for non-boundary nodes {unknown}")
    rho = c.rho if c is not None else {e: 1.0 for e in t.edge_ids}

    out = []
    for node in t.nodes:
        edges = nc.incidence[node]
        if len(edges) == 1:
            if node in bc:
                cond = BoundaryCondition.coerce(bc[node])
            elif default is not None:
                cond = BoundaryCondition.coerce(default)
            else:
                raise MissingBoundarySpec(f"no boundary condition for node {node!r}")
            out.append(BoundaryFunctional(node, edges[0], cond))
        else:
            for a, b in zip(edges[:-1], edges[1:]):
                out.append(Continuity(node, a, b))
            out.append(FluxSum(node, edges, tuple(rho[e] for e in edges)))
    assert len(out) == 2 * t.m
    return out


def apply(fn, tr: Trace, c: Coefficients | None = None) -> float:
    """Evaluate one functional on a trace."""
    if isinstance(fn, Continuity):
        return tr.value(fn.node, fn.edge_b) - tr.value(fn.node, fn.edge_a)
    if isinstance(fn, FluxSum):
        return sum(w * tr.derivative(fn.node, e) for e, w in zip(fn.edges, fn.weights))
    if isinstance(fn, BoundaryFunctional):
        cond = fn.condition
        val, der, _ = tr.at(fn.node, fn.edge)
        return cond.alpha * val + cond.beta * der
    raise TypeError(f"not a functional: {fn!r}")


def basis_traces(b: FundamentalBasis) -> list[Trace]:
    """Traces of the ``2m`` basis functions."""
    t = b.tree
    traces = []
    for e, pair in zip(t.edges, b.solutions):
        for s in pair:
            f0, d0, g0 = eval_edge(s, 0.0)
            f1, d1, g1 = eval_edge(s, e.length)
            tr = Trace.from_edge_values(t, {e.id: (f0, d0, g0, f1, d1, g1)})
            for other in t.edges:
                if other.id != e.id:
                    tr[(other.id, TAIL)] = (0.0, 0.0, 0.0)
                    tr[(other.id, HEAD)] = (0.0, 0.0, 0.0)
            traces.append(tr)
    return traces


class DeltaMatrix:
    """Dense ``2m x 2m`` matrix with its LU factorization.

    ``solves`` counts calls to :meth:`solve` (one per right-hand side).
    """

    def __init__(self, matrix: np.ndarray):
        self.matrix = np.asarray(matrix, dtype=float)
        n = self.matrix.shape[0]
        if self.matrix.shape != (n, n):
            raise ValueError("Delta must be square")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LinAlgWarning)
            warnings.simplefilter("ignore", RuntimeWarning)
            self.lu, self.piv = scipy.linalg.lu_factor(self.matrix, check_finite=True)
        diag = np.diag(self.lu)
        perm_sign = (-1.0) ** np.count_nonzero(self.piv != np.arange(n))
        self.det = float(perm_sign * np.prod(diag))
        anorm = np.abs(self.matrix).sum(axis=0).max()
        if np.any(diag == 0.0) or anorm == 0.0:
            self.rcond = 0.0
        else:
            rcond, info = dgecon(self.lu, anorm, norm="1")
            self.rcond = float(rcond) if info == 0 else 0.0
        self.solves = 0

    def solve(self, rhs) -> np.ndarray:
        self.solves += 1
        return scipy.linalg.lu_solve((self.lu, self.piv), np.asarray(rhs, dtype=float))

    def __repr__(self):
        return f"DeltaMatrix(n={len(self.matrix)}, det={self.det:.6g}, rcond={self.rcond:.3g})"


def delta_matrix(b: FundamentalBasis, fs: list, c: Coefficients | None = None) -> DeltaMatrix:
    traces = basis_traces(b)
    mat = np.array([[apply(fn, tr, c) for tr in traces] for fn in fs])
    return DeltaMatrix(mat)


@dataclass(frozen=True)
class NondegeneracyReport:
    det: float
    rcond: float
    nondegenerate: bool


def check_nondegenerate(delta: DeltaMatrix, threshold: float = RCOND_THRESHOLD) -> NondegeneracyReport:
    """Flag ``Delta`` as degenerate when its reciprocal condition number is at
    or below ``threshold``."""
    return NondegeneracyReport(delta.det, delta.rcond, delta.rcond > threshold)
