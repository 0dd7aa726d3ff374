"""Edge-local solutions of ``-(p f')' + q f = 0``.

The equation is integrated as the first-order system

    f' = g / p,    g' = q f,

in the state ``(f, g)`` with ``g = p f'`` the flux.  Integration uses the
Dormand-Prince 5(4) embedded pair with a PI step-size controller.  The
stages of every accepted step are kept, and the solution between mesh points
comes from the pair's own quartic continuous extension.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coeffs import Coefficients
from .errors import CoefficientEvaluationError, OutOfDomain, StepSizeUnderflow
from .graph import TreeGraph

__all__ = [
    "EdgeSolution",
    "FundamentalBasis",
    "integrate_edge",
    "fundamental_basis",
    "eval",
]

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

# continuous extension: y(x0 + t h) = y0 + h * sum_i k_i * (_P[i] @ [t, t^2, t^3, t^4])
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_SAFETY = 0.9
_ALPHA = 0.7 / 5
_BETA = 0.4 / 5
_MIN_FACTOR, _MAX_FACTOR = 0.2, 5.0


@dataclass(frozen=True)
class EdgeSolution:
    """Dense output of one edge integration.

    ``xs`` are the accepted mesh points and ``ys`` the states ``(f, g)``
    there (shape ``(n, 2)``).  ``Q`` holds, per step, the polynomial
    coefficients of the continuous extension (shape ``(n - 1, 2, 4)``).
    """

    edge: object
    length: float
    xs: np.ndarray = field(repr=False)
    ys: np.ndarray = field(repr=False)
    Q: np.ndarray = field(repr=False)
    p: object = field(repr=False)
    tol: float = 1e-10

    @property
    def n_steps(self) -> int:
        return len(self.xs) - 1

    @property
    def final(self) -> np.ndarray:
        return self.ys[-1]

    def state(self, x):
        """Interpolated ``(f, g)``; the last axis has length 2."""
        x = np.asarray(x, dtype=float)
        if np.any(x < 0.0) or np.any(x > self.length):
            raise OutOfDomain(f"x outside [0, {self.length}] on edge {self.edge!r}")
        xs = self.xs
        k = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, len(xs) - 2)
        h = xs[k + 1] - xs[k]
        t = (x - xs[k]) / h
        powers = np.stack([t, t * t, t ** 3, t ** 4], axis=-1)
        out = self.ys[k] + h[..., None] * np.einsum("...ij,...j->...i", self.Q[k], powers)
        # mesh points return the stored states exactly
        return np.where((t == 1.0)[..., None], self.ys[k + 1], out)


def eval(s: EdgeSolution, x):
    """Return ``(f, f', p f')`` at ``x``."""
    st = s.state(x)
    f, g = st[..., 0], st[..., 1]
    return f, g / s.p(x), g


def _rhs(p, q):
    def fun(x, y):
        px = p(x)
        if not px > 0.0:
            raise CoefficientEvaluationError(f"p({x}) = {px} is not positive")
        return np.array([y[1] / px, q(x) * y[0]])

    return fun


def _initial_step(fun, x0, y0, f0, span, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    with np.errstate(over="ignore", invalid="ignore"):
        d0 = np.sqrt(np.mean((y0 / scale) ** 2))
        d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    if not np.isfinite(d1):
        return 0.0
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = fun(x0 + h0, y0 + h0 * f0)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, span)


def integrate_edge(e, c: Coefficients, init, tol: float = DEFAULT_RTOL,
                   atol: float = DEFAULT_ATOL, max_step: float | None = None,
                   tree: TreeGraph | None = None) -> EdgeSolution:
    """Integrate the kernel equation on edge ``e`` from ``x = 0`` to its length.

    Parameters
    ----------
    e : edge id
    c : Coefficients
    init : pair
        Initial state ``(f(0), p(0) f'(0))``.
    tol : float
        Relative tolerance; ``atol`` is the absolute one.
    max_step : float, optional
        Upper bound on accepted step sizes.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    tree = tree or c.tree
    length = tree.edge(e).length
    p, q = c.p[e], c.q[e]
    fun = _rhs(p, q)
    max_step = length if max_step is None else min(max_step, length)

    x = 0.0
    y = np.asarray(init, dtype=float).copy()
    fy = fun(x, y)
    xs, ys, Qs = [x], [y.copy()], []
    h = min(_initial_step(fun, x, y, fy, length, tol, atol), max_step)
    err_prev = 1e-4
    h_min = 16 * np.finfo(float).eps * length
    k = np.empty((7, 2))

    while x < length:
        if not h >= h_min:
            raise StepSizeUnderflow(f"step size underflow at x={x} on edge {e!r}")
        if length - x <= h * (1 + 1e-12):
            h = length - x
        k[0] = fy
        for i in range(1, 7):
            k[i] = fun(x + _C[i] * h, y + h * (np.asarray(_A[i]) @ k[:i]))
        y_new = y + h * (_B5 @ k)
        err_vec = h * (_E @ k)
        scale = atol + tol * np.maximum(np.abs(y), np.abs(y_new))
        with np.errstate(over="ignore", invalid="ignore"):
            err = np.sqrt(np.mean((err_vec / scale) ** 2))
        if not (np.isfinite(err) and np.all(np.isfinite(y_new))):
            err = np.inf

        if err <= 1.0:
            x_new = x + h if x + h < length else length
            Qs.append(k.T @ _P)
            fy = k[6].copy()  # FSAL: last stage is f(x + h, y_new)
            x, y = x_new, y_new
            xs.append(x)
            ys.append(y.copy())
            if err == 0.0:
                factor = _MAX_FACTOR
            else:
                factor = _SAFETY * err ** -_ALPHA * err_prev ** _BETA
                factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            err_prev = max(err, 1e-4)
            h = min(h * factor, max_step)
        else:
            h *= max(_MIN_FACTOR, _SAFETY * err ** (-1 / 5))

    return EdgeSolution(e, length, np.array(xs), np.array(ys), np.array(Qs), p, tol)


@dataclass(frozen=True)
class FundamentalBasis:
    """The ``2m`` edge-supported kernel solutions.

    For the edge at position ``i`` (0-based) in declaration order, basis
    functions ``2i`` and ``2i + 1`` (0-based) start from ``f = 1, f' = 0`` and
    ``f = 0, f' = 1`` respectively and vanish on every other edge.
    """

    tree: TreeGraph = field(repr=False)
    solutions: tuple  # one pair (even, odd) of EdgeSolution per edge

    def __len__(self):
        return 2 * self.tree.m

    def pair(self, edge_id) -> tuple[EdgeSolution, EdgeSolution]:
        return self.solutions[self.tree.index(edge_id)]

    def columns(self, edge_id) -> tuple[int, int]:
        i = self.tree.index(edge_id)
        return 2 * i, 2 * i + 1

    def evaluate(self, j: int, edge_id, x):
        """``(f, f', p f')`` of basis function ``j`` (0-based) on ``edge_id``."""
        i, r = divmod(j, 2)
        if self.tree.edges[i].id != edge_id:
            z = np.zeros_like(np.asarray(x, dtype=float))
            return z, z, z
        return eval(self.solutions[i][r], x)

    def combine(self, a, edge_id, x):
        """``(f, f', p f')`` of ``sum_j a_j phi_j`` on ``edge_id``."""
        j0, j1 = self.columns(edge_id)
        s0, s1 = self.pair(edge_id)
        f0, d0, g0 = eval(s0, x)
        f1, d1, g1 = eval(s1, x)
        return a[j0] * f0 + a[j1] * f1, a[j0] * d0 + a[j1] * d1, a[j0] * g0 + a[j1] * g1


def fundamental_basis(t: TreeGraph, c: Coefficients, tol: float = DEFAULT_RTOL,
                      atol: float = DEFAULT_ATOL) -> FundamentalBasis:
    """Integrate both initial-value problems on every edge.

    The second solution starts from flux ``p(0)`` so that ``f'(0) = 1``.
    """
    sols = []
    for e in t.edges:
        p0 = float(c.p[e.id](0.0))
        s_even = integrate_edge(e.id, c, (1.0, 0.0), tol, atol, tree=t)
        s_odd = integrate_edge(e.id, c, (0.0, p0), tol, atol, tree=t)
        sols.append((s_even, s_odd))
    return FundamentalBasis(t, tuple(sols))
