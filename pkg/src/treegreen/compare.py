"""Cross-checks of the Green's function against independent constructions."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .green import GreensFunction
from .graph import GraphPoint
from .oracle import discretize, oracle_green, oracle_solve

__all__ = ["Deviation", "compare_pokornyi", "compare_oracle", "interior_grid"]


@dataclass(frozen=True)
class Deviation:
    """Largest absolute deviation and the same relative to the reference scale."""

    abs: float
    rel: float
    scale: float
    n_samples: int

    def merge(self, other: "Deviation") -> "Deviation":
        scale = max(self.scale, other.scale)
        a = max(self.abs, other.abs)
        return Deviation(a, a / scale if scale > 0 else a, scale, self.n_samples + other.n_samples)


def _deviation(diff, ref) -> Deviation:
    diff, ref = np.abs(np.asarray(diff)), np.abs(np.asarray(ref))
    a = float(diff.max()) if diff.size else 0.0
    s = float(ref.max()) if ref.size else 0.0
    return Deviation(a, a / s if s > 0 else a, s, int(diff.size))


def interior_grid(length: float, n: int) -> np.ndarray:
    """``n`` points ``length * k / (n + 1)``, ``k = 1..n``."""
    return length * np.arange(1, n + 1) / (n + 1)


def compare_pokornyi(g: GreensFunction, n: int = 5) -> Deviation:
    """Max of ``|rho_{e_y} G(x, y) - G_P(x, y)|`` over all pairs of interior
    grid points (``n`` per edge)."""
    t = g.tree
    pts = [GraphPoint(e.id, float(x)) for e in t.edges for x in interior_grid(e.length, n)]
    diff, ref = [], []
    for x in pts:
        for y in pts:
            gp = g.pokornyi_green(x, y)
            diff.append(g.coeffs.rho[y.edge] * g.green_eval(x, y) - gp)
            ref.append(gp)
    return _deviation(diff, ref)


def compare_oracle(g: GreensFunction, bc=None, h=None, n: int = 2000,
                   n_sources: int = 3, n_check: int = 19) -> dict:
    """Finite-difference comparison of kernel columns and of one solution.

    Kernel columns are taken at ``n_sources`` interior source points per edge
    (snapped to the mesh); every column and the solution for ``h`` (default 1)
    are compared at ``n_check`` interior mesh points per edge.  Deviations are
    relative to the largest reference value of each quantity.

    Returns
    -------
    dict with keys ``kernel``, ``solution`` (:class:`Deviation`) and
    ``system`` (the discretization).
    """
    t = g.tree
    sys = discretize(t, g.coeffs, bc, n)
    step = max(1, n // (n_check + 1))
    check = {e.id: np.arange(step, n, step) for e in t.edges}

    kernel = None
    for e in t.edges:
        for y in interior_grid(e.length, n_sources):
            col = oracle_green(sys, GraphPoint(e.id, float(y)))
            for ex in t.edges:
                xs = sys.mesh(ex.id)[check[ex.id]]
                approx = col(ex.id, xs)
                exact = np.array([g.green_eval(GraphPoint(ex.id, float(x)), col.source) for x in xs])
                d = _deviation(approx - exact, exact)
                kernel = d if kernel is None else kernel.merge(d)

    h = 1.0 if h is None else h
    f_fd = oracle_solve(sys, h)
    f = g.green_apply(h)
    solution = None
    for e in t.edges:
        xs = sys.mesh(e.id)[check[e.id]]
        exact = f(e.id, xs)
        d = _deviation(f_fd(e.id, xs) - exact, exact)
        solution = d if solution is None else solution.merge(d)
    return {"kernel": kernel, "solution": solution, "system": sys}
