"""Green's function of a non-degenerate Sturm-Liouville problem on a tree.

For a point ``x`` interior to edge ``e`` the tree splits into the side
containing the tail of ``e`` (gamma side) and the side containing its head
(lambda side).  Two kernel solutions are built from global solutions of the
node conditions:

* ``psi_gamma`` satisfies every homogeneous node condition on the gamma side
  of ``e`` (it is the global solution that is "switched on" at a boundary
  node on the lambda side),
* ``psi_lambda`` likewise for the lambda side,

scaled so that ``p W[psi_gamma, psi_lambda] = -1`` on ``e``.  Then::

    G(x, y) = psi_gamma(y) psi_lambda(x) / rho_e    if y is on the gamma side of x
    G(x, y) = psi_lambda(y) psi_gamma(x) / rho_e    otherwise

and ``f(x) = sum_e' rho_e' int_e' G(x, y) h(y) dy`` solves ``L f = h`` with all
node functionals zero.

Each global solution needs one solve with ``Delta`` and is tied to one
boundary node, so building the pairs for all edges costs exactly one solve
per boundary node.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Mapping

import numpy as np

from .coeffs import Coefficients, as_edge_function, check_p_continuous
from .conditions import (
    BoundaryFunctional,
    Trace,
    apply,
    check_nondegenerate,
    delta_matrix,
    standard_functionals,
)
from .edgeode import DEFAULT_ATOL, DEFAULT_RTOL, FundamentalBasis, eval as eval_edge, fundamental_basis
from .function import FunctionOnGraph
from .errors import DegenerateProblem, IntervalDegenerate, NonConstantWronskian, PointAtNode
from .graph import HEAD, TAIL, GraphPoint, Side, TreeGraph, locate_side, node_key
from .quadrature import integrate_segments

__all__ = [
    "GlobalKernelSolution",
    "PsiPair",
    "FunctionOnGraph",
    "GreensFunction",
]

WRONSKIAN_CONSTANCY = 1e-6
WRONSKIAN_DEGENERACY = 1e-12


@dataclass(frozen=True)
class GlobalKernelSolution:
    """``sum_j a_j phi_j`` with ``Delta a`` equal to the unit vector of the
    boundary functional at ``node``."""

    node: Hashable
    a: np.ndarray
    basis: FundamentalBasis = field(repr=False)

    def evaluate(self, edge, x):
        """``(f, f', p f')`` on ``edge`` at local coordinate(s) ``x``."""
        return self.basis.combine(self.a, edge, x)

    def __call__(self, p: GraphPoint):
        return float(self.evaluate(p.edge, p.x)[0])


@dataclass(frozen=True)
class PsiPair:
    """Normalized kernel pair for one edge.

    ``lam_scale`` multiplies the cached global solution behind ``psi_lambda``;
    ``wronskian`` is ``p W[psi_gamma, psi_lambda]`` after scaling and
    ``wronskian_samples`` the raw values it was checked on.
    """

    edge: Hashable
    gamma: GlobalKernelSolution = field(repr=False)
    lam: GlobalKernelSolution = field(repr=False)
    lam_scale: float
    wronskian: float
    wronskian_samples: tuple

    def psi_gamma(self, edge, x):
        return self.gamma.evaluate(edge, x)

    def psi_lambda(self, edge, x):
        f, d, g = self.lam.evaluate(edge, x)
        s = self.lam_scale
        return s * f, s * d, s * g

    def pw(self, x):
        """``p W[psi_gamma, psi_lambda]`` on the pair's edge."""
        fg, _, gg = self.psi_gamma(self.edge, x)
        fl, _, gl = self.psi_lambda(self.edge, x)
        return fg * gl - fl * gg


def _as_rhs(tree, h):
    if isinstance(h, Mapping):
        return {e: as_edge_function(h[e]) for e in tree.edge_ids}
    f = as_edge_function(h)
    return {e: f for e in tree.edge_ids}


class GreensFunction:
    """Green's function for ``-(p f')' + q f = h`` with standard node conditions.

    Parameters
    ----------
    tree : TreeGraph
    coeffs : Coefficients
    bc : mapping, optional
        Boundary node -> condition; unspecified boundary nodes are Dirichlet.
    ode_tol : float
        Relative tolerance of the edge integrations.
    quad_tol : float
        Relative tolerance of the quadrature in :meth:`green_apply`.

    Raises
    ------
    DegenerateProblem
        If the homogeneous problem has a nontrivial solution.
    DiscontinuousP
        If ``p`` differs between edges at an internal node.
    """

    def __init__(self, tree: TreeGraph, coeffs: Coefficients, bc: Mapping | None = None, *,
                 ode_tol: float = DEFAULT_RTOL, ode_atol: float = DEFAULT_ATOL,
                 quad_tol: float = 1e-9):
        check_p_continuous(coeffs, tree)
        self.tree = tree
        self.coeffs = coeffs
        self.quad_tol = quad_tol
        self.functionals = standard_functionals(tree, bc, coeffs)
        self.basis = fundamental_basis(tree, coeffs, ode_tol, ode_atol)
        self.delta = delta_matrix(self.basis, self.functionals, coeffs)
        self.report = check_nondegenerate(self.delta)
        if not self.report.nondegenerate:
            raise DegenerateProblem(
                f"Delta is singular (det={self.report.det:.3g}, rcond={self.report.rcond:.3g})"
            )
        self._boundary_row = {
            fn.node: i for i, fn in enumerate(self.functionals) if isinstance(fn, BoundaryFunctional)
        }
        self._psi = {}
        self._delta_inv = None
        self.pairs = {e.id: self.psi_pair(e.id) for e in tree.edges}

    @property
    def solve_count(self) -> int:
        """Number of linear solves performed with ``Delta`` so far."""
        return self.delta.solves

    # construction

    def psi_for_boundary_node(self, node) -> GlobalKernelSolution:
        """Global kernel solution with unit boundary functional at ``node`` and
        all other functionals zero (cached)."""
        if node in self._psi:
            return self._psi[node]
        if node not in self._boundary_row:
            raise ValueError(f"{node!r} is not a boundary node")
        rhs = np.zeros(len(self.functionals))
        rhs[self._boundary_row[node]] = 1.0
        sol = GlobalKernelSolution(node, self.delta.solve(rhs), self.basis)
        self._psi[node] = sol
        return sol

    def psi_pair(self, edge) -> PsiPair:
        t = self.tree
        e = t.edge(edge)
        boundary = set(t.boundary)
        lam_side = sorted(boundary & t.head_side_nodes(edge), key=node_key)
        gam_side = sorted(boundary & t.tail_side_nodes(edge), key=node_key)
        gamma = self.psi_for_boundary_node(lam_side[0])
        lam = self.psi_for_boundary_node(gam_side[0])

        xs = e.length * np.array([0.25, 0.5, 0.75])
        fg, _, gg = gamma.evaluate(edge, xs)
        fl, _, gl = lam.evaluate(edge, xs)
        w = fg * gl - fl * gg
        scale = np.max(np.abs(fg * gl) + np.abs(fl * gg))
        w0 = w[1]
        if not abs(w0) > WRONSKIAN_DEGENERACY * scale:
            raise DegenerateProblem(f"p W vanishes on edge {edge!r}")
        if np.max(np.abs(w - w0)) > WRONSKIAN_CONSTANCY * abs(w0):
            raise NonConstantWronskian(f"p W varies along edge {edge!r}: {w}")
        s = -1.0 / w0
        return PsiPair(edge, gamma, lam, s, float(w0 * s), tuple(w))

    # evaluation

    def _check_interior(self, x: GraphPoint):
        e = self.tree.edge(x.edge)
        if not 0.0 < x.x < e.length:
            raise PointAtNode(f"x={x} must be interior; use green_limit at nodes")
        return e

    def _side(self, x: GraphPoint, y: GraphPoint) -> Side:
        if y.edge == x.edge and y.x == x.x:
            return Side.GAMMA  # G is continuous across y = x
        return locate_side(self.tree, x, y)

    def green_eval(self, x: GraphPoint, y: GraphPoint) -> float:
        """``G(x, y)`` for ``x`` interior to its edge."""
        return self.green_eval_dx(x, y)[0]

    def green_eval_dx(self, x: GraphPoint, y: GraphPoint) -> tuple[float, float]:
        """``(G(x, y), dG/dx(x, y))`` with the derivative along ``x``'s edge."""
        self._check_interior(x)
        pair = self.pairs[x.edge]
        rho = self.coeffs.rho[x.edge]
        if self._side(x, y) is Side.GAMMA:
            fy = pair.psi_gamma(y.edge, y.x)[0]
            fx, dx, _ = pair.psi_lambda(x.edge, x.x)
        else:
            fy = pair.psi_lambda(y.edge, y.x)[0]
            fx, dx, _ = pair.psi_gamma(x.edge, x.x)
        return float(fy * fx / rho), float(fy * dx / rho)

    __call__ = green_eval

    def green_limit(self, node, edge, y: GraphPoint) -> tuple[float, float]:
        """One-sided limit of ``(G(x, y), d^b G/dx(x, y))`` as ``x`` tends to
        ``node`` along ``edge``; the derivative is the boundary derivative
        (out of the node into the edge)."""
        t = self.tree
        e = t.edge(edge)
        end = e.end(node)
        xc = e.coord(end)
        pair = self.pairs[edge]
        if y.edge == edge:
            on_gamma = y.x < xc or (y.x == xc == 0.0)
        else:
            on_gamma = t.edge(y.edge).tail in t.tail_side_nodes(edge)
        if on_gamma:
            fy = pair.psi_gamma(y.edge, y.x)[0]
            fx, dx, _ = pair.psi_lambda(edge, xc)
        else:
            fy = pair.psi_lambda(y.edge, y.x)[0]
            fx, dx, _ = pair.psi_gamma(edge, xc)
        rho = self.coeffs.rho[edge]
        sign = 1.0 if end == TAIL else -1.0
        return float(fy * fx / rho), float(sign * fy * dx / rho)

    def kernel_row(self, x: GraphPoint, y_edge, ys) -> np.ndarray:
        """``G(x, (y_edge, y))`` for an array of positions ``ys``."""
        self._check_interior(x)
        ys = np.asarray(ys, dtype=float)
        pair = self.pairs[x.edge]
        rho = self.coeffs.rho[x.edge]
        gx = pair.psi_gamma(x.edge, x.x)[0]
        lx = pair.psi_lambda(x.edge, x.x)[0]
        gy = pair.psi_gamma(y_edge, ys)[0]
        ly = pair.psi_lambda(y_edge, ys)[0]
        if y_edge == x.edge:
            on_gamma = ys <= x.x
        else:
            on_gamma = np.full(ys.shape, self.tree.edge(y_edge).tail in self.tree.tail_side_nodes(x.edge))
        return np.where(on_gamma, gy * lx, ly * gx) / rho

    # Green operator

    def _full_edge_integrals(self, psi: GlobalKernelSolution, h: dict, cache: dict):
        key = psi.node
        if key not in cache:
            vals = {}
            for e in self.tree.edges:
                f = lambda y, e=e: psi.evaluate(e.id, y)[0] * h[e.id](y)
                v, _ = integrate_segments(f, [0.0, e.length], rtol=self.quad_tol)
                vals[e.id] = float(v[0])
            cache[key] = vals
        return cache[key]

    def _side_constants(self, h: dict) -> dict:
        """Per edge: rho-weighted integrals of ``psi h`` over the other edges
        on each side."""
        t = self.tree
        cache = {}
        out = {}
        for e in t.edges:
            pair = self.pairs[e.id]
            jg = self._full_edge_integrals(pair.gamma, h, cache)
            jl = self._full_edge_integrals(pair.lam, h, cache)
            gam_edges = t.edges_among(t.tail_side_nodes(e.id))
            lam_edges = t.edges_among(t.head_side_nodes(e.id))
            cg = sum(self.coeffs.rho[a] * jg[a] for a in gam_edges)
            cl = pair.lam_scale * sum(self.coeffs.rho[a] * jl[a] for a in lam_edges)
            out[e.id] = (cg, cl)
        return out

    def _apply_on_edge(self, edge, x, h: dict, constants: dict):
        e = self.tree.edge(edge)
        pair = self.pairs[edge]
        rho = self.coeffs.rho[edge]
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        pts = np.unique(np.concatenate([[0.0, e.length], flat]))
        hf = h[edge]
        sg, _ = integrate_segments(lambda y: pair.psi_gamma(edge, y)[0] * hf(y), pts, rtol=self.quad_tol)
        sl, _ = integrate_segments(lambda y: pair.psi_lambda(edge, y)[0] * hf(y), pts, rtol=self.quad_tol)
        cum_g = np.concatenate([[0.0], np.cumsum(sg)])
        cum_l = np.concatenate([[0.0], np.cumsum(sl)])
        cg, cl = constants[edge]
        A = cg + rho * cum_g                   # weight on psi_lambda(x)
        B = cl + rho * (cum_l[-1] - cum_l)     # weight on psi_gamma(x)
        idx = np.searchsorted(pts, flat)
        fg, dg, _ = pair.psi_gamma(edge, flat)
        fl, dl, _ = pair.psi_lambda(edge, flat)
        f = (fl * A[idx] + fg * B[idx]) / rho
        d = (dl * A[idx] + dg * B[idx]) / rho
        return f.reshape(x.shape), d.reshape(x.shape)

    def green_apply(self, h) -> FunctionOnGraph:
        """Solve ``L f = h`` with every node functional equal to zero.

        ``h`` is one value (expression string, number, callable or
        EdgeFunction) for all edges, or a mapping edge -> value.  The result
        integrates ``G(x, .) h`` against ``rho dy``, splitting the integral on
        ``x``'s own edge at ``x``.
        """
        hmap = _as_rhs(self.tree, h)
        constants = self._side_constants(hmap)

        def evaluator(edge, x):
            return self._apply_on_edge(edge, x, hmap, constants)

        return FunctionOnGraph(self.tree, self.coeffs, evaluator)

    def solve_general(self, h, c=None) -> FunctionOnGraph:
        """Solve ``L f = h`` with ``l_i[f] = c_i`` (functional order as in
        :attr:`functionals`)."""
        n = len(self.functionals)
        c = np.zeros(n) if c is None else np.asarray(c, dtype=float)
        if c.shape != (n,):
            raise ValueError(f"c must have length {n}")
        z = self.green_apply(h)
        a = self.delta.solve(c) if np.any(c) else np.zeros(n)

        def evaluator(edge, x):
            fz, dz = z.evaluate(edge, x)
            fk, dk, _ = self.basis.combine(a, edge, x)
            return fz + fk, dz + dk

        out = FunctionOnGraph(self.tree, self.coeffs, evaluator)
        out.kernel_coefficients = a
        return out

    def functional_values(self, f: FunctionOnGraph) -> np.ndarray:
        """``l_i[f]`` for every functional."""
        tr = f.trace()
        return np.array([apply(fn, tr, self.coeffs) for fn in self.functionals])

    # alternative kernel from per-edge interval Green's functions

    def _interval_kernel(self, edge):
        """``(u1, u2, K)`` with ``u1(0) = 0``, ``u2`` vanishing (or with zero
        flux) at ``l`` and ``K = -p W[u1, u2]``, as coefficient pairs over the
        edge's two basis functions."""
        cache = getattr(self, "_interval_cache", None)
        if cache is None:
            cache = self._interval_cache = {}
        if edge in cache:
            return cache[edge]
        e = self.tree.edge(edge)
        s_even, s_odd = self.basis.pair(edge)
        fe, _, ge = eval_edge(s_even, e.length)
        fo, _, go = eval_edge(s_odd, e.length)
        p0 = float(self.coeffs.p[edge](0.0))
        u1 = (0.0, 1.0)
        # Dirichlet at l; if that interval problem is degenerate, zero flux at l
        u2 = (fo, -fe)
        if abs(fo) <= WRONSKIAN_DEGENERACY * max(abs(fe), abs(fo), 1.0):
            u2 = (go, -ge)
        u2_at_0 = u2[0]
        K = u2_at_0 * p0
        if abs(K) <= WRONSKIAN_DEGENERACY * max(abs(u2[0]), abs(u2[1]), 1.0) * p0:
            raise IntervalDegenerate(f"interval problem on edge {edge!r} is degenerate")
        cache[edge] = (u1, u2, K)
        return cache[edge]

    def _interval_eval(self, edge, coef, x):
        s_even, s_odd = self.basis.pair(edge)
        fe, de, ge = eval_edge(s_even, x)
        fo, do, go = eval_edge(s_odd, x)
        return coef[0] * fe + coef[1] * fo, coef[0] * de + coef[1] * do

    def interval_green(self, edge, x, y) -> float:
        """Per-edge interval Green's function ``H(x, y)`` w.r.t. ``dy``."""
        u1, u2, K = self._interval_kernel(edge)
        lo, hi = min(x, y), max(x, y)
        return float(self._interval_eval(edge, u1, lo)[0] * self._interval_eval(edge, u2, hi)[0] / K)

    def _interval_trace(self, y: GraphPoint) -> Trace:
        e = self.tree.edge(y.edge)
        u1, u2, K = self._interval_kernel(y.edge)
        u1y = self._interval_eval(y.edge, u1, y.x)[0]
        u2y = self._interval_eval(y.edge, u2, y.x)[0]
        f0, d0 = self._interval_eval(y.edge, u1, 0.0)
        fl, dl = self._interval_eval(y.edge, u2, e.length)
        tr = Trace(self.tree)
        for other in self.tree.edges:
            tr[(other.id, TAIL)] = (0.0, 0.0, 0.0)
            tr[(other.id, HEAD)] = (0.0, 0.0, 0.0)
        p = self.coeffs.p[y.edge]
        tr[(y.edge, TAIL)] = (f0 * u2y / K, d0 * u2y / K, p(0.0) * d0 * u2y / K)
        tr[(y.edge, HEAD)] = (u1y * fl / K, -u1y * dl / K, -p(e.length) * u1y * dl / K)
        return tr

    def pokornyi_green(self, x: GraphPoint, y: GraphPoint) -> float:
        """``H(x, y) - sum_i l_i[H(., y)] eta_i(x)``: the kernel w.r.t. ``dy``,
        equal to ``rho_{e_y} G(x, y)``.

        ``eta_i`` are the kernel solutions with ``l_j[eta_i] = delta_ij``; they
        are the columns of ``Delta^{-1}`` in the basis and cost ``2m`` solves
        the first time.
        """
        if self._delta_inv is None:
            n = len(self.functionals)
            self._delta_inv = np.column_stack([self.delta.solve(col) for col in np.eye(n)])
        tr = self._interval_trace(y)
        b = np.array([apply(fn, tr, self.coeffs) for fn in self.functionals])
        coef = self._delta_inv @ b
        h = self.interval_green(x.edge, x.x, y.x) if x.edge == y.edge else 0.0
        corr = self.basis.combine(coef, x.edge, x.x)[0]
        return float(h - corr)
