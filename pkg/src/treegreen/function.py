"""Functions on a tree given edge by edge."""
from __future__ import annotations

import numpy as np

from .coeffs import Coefficients
from .graph import GraphPoint, TreeGraph

__all__ = ["FunctionOnGraph"]


class FunctionOnGraph:
    """A function given edgewise by an evaluator ``(edge, x) -> (f, f')``.

    ``samples`` optionally holds precomputed ``(xs, f)`` arrays per edge; they
    are used directly when no evaluator is supplied (piecewise-linear
    interpolation).
    """

    def __init__(self, tree: TreeGraph, coeffs: Coefficients, evaluator=None, samples=None):
        self.tree = tree
        self.coeffs = coeffs
        self._evaluator = evaluator
        self.samples = samples or {}

    def evaluate(self, edge, x):
        """``(f, f')`` at local coordinate(s) ``x``."""
        if self._evaluator is not None:
            return self._evaluator(edge, np.asarray(x, dtype=float))
        xs, fs = self.samples[edge]
        f = np.interp(x, xs, fs)
        d = np.interp(x, 0.5 * (xs[1:] + xs[:-1]), np.diff(fs) / np.diff(xs))
        return f, d

    def __call__(self, edge, x):
        f = self.evaluate(edge, x)[0]
        return float(f) if np.ndim(f) == 0 else f

    def at(self, p: GraphPoint) -> float:
        return float(self.evaluate(p.edge, p.x)[0])

    def flux(self, edge, x):
        f, d = self.evaluate(edge, x)
        return self.coeffs.p[edge](x) * d

    def sample(self, n: int) -> dict:
        """``{edge: (xs, f)}`` at ``n`` equispaced points including both ends."""
        out = {}
        for e in self.tree.edges:
            xs = np.linspace(0.0, e.length, n)
            out[e.id] = (xs, np.asarray(self.evaluate(e.id, xs)[0]))
        return out

    def trace(self):
        """End values and boundary derivatives as a :class:`~treegreen.conditions.Trace`."""
        from .conditions import Trace

        values = {}
        for e in self.tree.edges:
            f, d = self.evaluate(e.id, np.array([0.0, e.length]))
            p = self.coeffs.p[e.id]
            values[e.id] = (f[0], d[0], p(0.0) * d[0], f[1], d[1], p(e.length) * d[1])
        return Trace.from_edge_values(self.tree, values)
