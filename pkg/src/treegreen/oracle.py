"""Finite-difference discretization of the tree problem, used as an oracle.

Each edge is cut into ``n`` equal cells.  Unknowns are the values at the
interior mesh points of every edge plus one value per node, so continuity at
nodes holds by construction.  Interior rows use the conservative three-point
stencil

    [p_{j+1/2} (f_j - f_{j+1}) + p_{j-1/2} (f_j - f_{j-1})] / dx^2 + q_j f_j = h_j,

internal-node rows impose ``sum_e rho_e f_e'^b = 0`` and boundary rows
``alpha f + beta f'^b = 0``, with second-order one-sided differences for the
boundary derivatives.

Nothing here depends on the ODE integrator or on the Green's function code.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .coeffs import Coefficients, as_edge_function
from .conditions import BoundaryCondition
from .errors import MissingBoundarySpec, SingularSystem
from .graph import GraphPoint, TreeGraph
from .function import FunctionOnGraph

__all__ = ["DiscreteSystem", "discretize", "oracle_solve", "oracle_green"]

SINGULAR_RCOND = 1e-12


@dataclass
class DiscreteSystem:
    tree: TreeGraph
    coeffs: Coefficients
    n: int
    A: sp.csr_matrix = field(repr=False)
    weights: np.ndarray = field(repr=False)
    node_index: dict = field(repr=False)
    edge_offset: dict = field(repr=False)
    interior_rows: np.ndarray = field(repr=False)
    _lu: object = field(default=None, repr=False)
    _row_scale: np.ndarray | None = field(default=None, repr=False)
    _rcond: float | None = field(default=None, repr=False)

    def dx(self, edge) -> float:
        return self.tree.edge(edge).length / self.n

    def mesh(self, edge) -> np.ndarray:
        return np.linspace(0.0, self.tree.edge(edge).length, self.n + 1)

    def indices(self, edge) -> np.ndarray:
        """Global unknown index of mesh points ``0..n`` on ``edge``."""
        e = self.tree.edge(edge)
        off = self.edge_offset[edge]
        idx = np.empty(self.n + 1, dtype=int)
        idx[0] = self.node_index[e.tail]
        idx[-1] = self.node_index[e.head]
        idx[1:-1] = off + np.arange(self.n - 1)
        return idx

    @property
    def size(self) -> int:
        return self.A.shape[0]

    def factorize(self):
        """Sparse LU of the row-equilibrated matrix plus a 1-norm reciprocal
        condition estimate.

        Raises :class:`SingularSystem` when the estimate is at or below
        ``SINGULAR_RCOND``.
        """
        if self._lu is None:
            # rows mix O(1) node conditions with O(1/dx^2) stencils
            scale = 1.0 / abs(self.A).max(axis=1).toarray().ravel()
            A = (sp.diags(scale) @ self.A).tocsc()
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                try:
                    lu = spla.splu(A)
                except RuntimeError as exc:
                    raise SingularSystem(str(exc)) from None
            inv = spla.LinearOperator(
                A.shape, matvec=lu.solve, rmatvec=lambda v: lu.solve(v, trans="T"), dtype=float
            )
            with np.errstate(all="ignore"):
                inv_norm = spla.onenormest(inv)
            a_norm = abs(A).sum(axis=0).max()
            rcond = 0.0 if not np.isfinite(inv_norm) or inv_norm == 0 else 1.0 / (a_norm * inv_norm)
            self._lu, self._row_scale, self._rcond = lu, scale, rcond
        if not self._rcond > SINGULAR_RCOND:
            raise SingularSystem(f"finite-difference matrix is singular (rcond ~ {self._rcond:.2g})")
        return self._lu

    def solve(self, b: np.ndarray) -> np.ndarray:
        """Solve ``A u = b``."""
        lu = self.factorize()
        return lu.solve(self._row_scale * b)

    @property
    def rcond(self) -> float:
        try:
            self.factorize()
        except SingularSystem:
            pass
        return self._rcond if self._rcond is not None else 0.0

    def to_function(self, u: np.ndarray) -> FunctionOnGraph:
        samples = {e.id: (self.mesh(e.id), u[self.indices(e.id)]) for e in self.tree.edges}
        return FunctionOnGraph(self.tree, self.coeffs, samples=samples)


def discretize(t: TreeGraph, c: Coefficients, bc: Mapping | None = None, n: int = 2000) -> DiscreteSystem:
    """Assemble the sparse system with ``n`` cells per edge."""
    if n < 2:
        raise ValueError("need at least 2 cells per edge")
    bc = dict(bc or {})
    unknown = [k for k in bc if k not in t.boundary]
    if unknown:
        raise MissingBoundarySpec(f"boundary conditions given for non-boundary nodes {unknown}")
    nc = t.node_class
    node_index = {node: i for i, node in enumerate(t.nodes)}
    edge_offset = {}
    pos = len(t.nodes)
    for e in t.edges:
        edge_offset[e.id] = pos
        pos += n - 1
    size = pos

    rows, cols, vals = [], [], []
    weights = np.zeros(size)
    interior_rows = []

    def put(r, cs, vs):
        rows.extend([r] * len(cs))
        cols.extend(cs)
        vals.extend(vs)

    idx_of = {}
    for e in t.edges:
        dx = e.length / n
        xs = np.linspace(0.0, e.length, n + 1)
        idx = np.empty(n + 1, dtype=int)
        idx[0], idx[-1] = node_index[e.tail], node_index[e.head]
        idx[1:-1] = edge_offset[e.id] + np.arange(n - 1)
        idx_of[e.id] = idx
        p_mid = np.asarray(c.p[e.id](0.5 * (xs[1:] + xs[:-1])), dtype=float)
        q = np.asarray(c.q[e.id](xs[1:-1]), dtype=float)
        rho = c.rho[e.id]
        j = np.arange(1, n)
        r = idx[1:-1]
        for cs, vs in (
            (idx[j - 1], -p_mid[j - 1] / dx**2),
            (idx[j], (p_mid[j - 1] + p_mid[j]) / dx**2 + q),
            (idx[j + 1], -p_mid[j] / dx**2),
        ):
            rows.extend(r)
            cols.extend(cs)
            vals.extend(vs)
        interior_rows.extend(r)
        weights[r] = rho * dx
        weights[idx[0]] += 0.5 * rho * dx
        weights[idx[-1]] += 0.5 * rho * dx

    def one_sided(node, edge):
        # boundary derivative out of `node` into `edge`: (-3 f0 + 4 f1 - f2) / (2 dx)
        e = t.edge(edge)
        idx = idx_of[edge]
        near = idx[:3] if node == e.tail else idx[::-1][:3]
        dx = e.length / n
        return list(near), [-1.5 / dx, 2.0 / dx, -0.5 / dx]

    for node in t.nodes:
        r = node_index[node]
        edges = nc.incidence[node]
        if len(edges) == 1:
            cond = BoundaryCondition.coerce(bc.get(node, "dirichlet"))
            cs, vs = one_sided(node, edges[0])
            vs = [cond.beta * v for v in vs]
            vs[0] += cond.alpha
            put(r, cs, vs)
        else:
            for eid in edges:
                cs, vs = one_sided(node, eid)
                put(r, cs, [c.rho[eid] * v for v in vs])

    A = sp.csr_matrix((vals, (rows, cols)), shape=(size, size))
    A.sum_duplicates()
    return DiscreteSystem(t, c, n, A, weights, node_index, edge_offset, np.array(interior_rows))


def _rhs_vector(sys: DiscreteSystem, h) -> np.ndarray:
    t = sys.tree
    if isinstance(h, Mapping):
        hmap = {e: as_edge_function(h[e]) for e in t.edge_ids}
    else:
        f = as_edge_function(h)
        hmap = {e: f for e in t.edge_ids}
    b = np.zeros(sys.size)
    for e in t.edges:
        xs = sys.mesh(e.id)[1:-1]
        b[sys.indices(e.id)[1:-1]] = np.asarray(hmap[e.id](xs), dtype=float)
    return b


def oracle_solve(sys: DiscreteSystem, h) -> FunctionOnGraph:
    """Solve ``A f = h`` (homogeneous node conditions); sampled on the mesh."""
    u = sys.solve(_rhs_vector(sys, h))
    return sys.to_function(u)


def oracle_green(sys: DiscreteSystem, y: GraphPoint) -> FunctionOnGraph:
    """Discrete kernel column ``x -> G(x, y)`` w.r.t. ``rho dy``.

    ``y`` is snapped to the nearest interior mesh point ``j`` and the source
    is ``1 / w_j`` with ``w_j = rho dx`` the quadrature weight there.
    """
    e = sys.tree.edge(y.edge)
    j = int(round(y.x / sys.dx(y.edge)))
    if not 1 <= j <= sys.n - 1:
        raise ValueError(f"{y} is too close to a node for mesh size {sys.n}")
    k = sys.indices(e.id)[j]
    b = np.zeros(sys.size)
    b[k] = 1.0 / sys.weights[k]
    u = sys.solve(b)
    out = sys.to_function(u)
    out.source = GraphPoint(y.edge, j * sys.dx(y.edge))
    return out
