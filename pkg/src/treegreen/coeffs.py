"""Per-edge coefficients of the operator ``-(p f')' + q f`` and edge weights.

Coefficient functions are written in edge-local coordinates.  They can be
given as expression strings (see :mod:`treegreen.expr`), constants, sampled
tables, or plain callables.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Mapping

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import expr
from .errors import (
    CoefficientError,
    CoefficientEvaluationError,
    DiscontinuousP,
    NonPositiveP,
    NonPositiveRho,
    NoRootDesignated,
)
from .graph import TreeGraph

__all__ = [
    "EdgeFunction",
    "ConstantFunction",
    "ExpressionFunction",
    "TableFunction",
    "CallableFunction",
    "Coefficients",
    "RiverData",
    "ValidationReport",
    "as_edge_function",
    "parse_expression",
    "river_coefficients",
    "validate",
    "node_jumps_p",
    "check_p_continuous",
]


class EdgeFunction:
    """A real function of the edge-local coordinate, vectorized over ``x``."""

    is_constant = False

    def __call__(self, x):
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantFunction(EdgeFunction):
    value: float
    is_constant = True

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            return float(self.value)
        return np.full(x.shape, float(self.value))

    def __str__(self):
        return repr(float(self.value))


@dataclass(frozen=True)
class ExpressionFunction(EdgeFunction):
    text: str
    tree: expr.Node = field(compare=False, repr=False)

    def __call__(self, x):
        return self.tree(x)

    def __str__(self):
        return self.text


class TableFunction(EdgeFunction):
    """Monotone cubic (PCHIP) interpolation of sampled values."""

    def __init__(self, xs, values, length=None):
        xs = np.asarray(xs, dtype=float)
        values = np.asarray(values, dtype=float)
        if length is not None and (xs[0] > 0.0 or xs[-1] < length):
            raise CoefficientError(f"table covers [{xs[0]}, {xs[-1]}], not [0, {length}]")
        self.xs = xs
        self.values = values
        self._interp = PchipInterpolator(xs, values, extrapolate=False)

    def __call__(self, x):
        out = self._interp(x)
        if np.any(np.isnan(out)):
            raise CoefficientEvaluationError("table evaluated outside its sample range")
        return out if np.ndim(out) else float(out)


class CallableFunction(EdgeFunction):
    def __init__(self, func: Callable, label: str = "<callable>"):
        self.func = func
        self.label = label

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.asarray(self.func(x), dtype=float)
        out = np.broadcast_to(out, x.shape).copy()
        return out if out.ndim else float(out)

    def __str__(self):
        return self.label


def parse_expression(text: str) -> EdgeFunction:
    """Parse a coefficient expression.

    Expressions without ``x`` become :class:`ConstantFunction`.

    >>> round(parse_expression("exp(-x/2)")(1.0), 10)
    0.6065306597
    """
    node = expr.parse(text)
    if not node.has_x:
        return ConstantFunction(expr.evaluate(node, 0.0))
    return ExpressionFunction(text, node)


def as_edge_function(value) -> EdgeFunction:
    if isinstance(value, EdgeFunction):
        return value
    if isinstance(value, str):
        return parse_expression(value)
    if isinstance(value, (int, float, np.floating, np.integer)):
        return ConstantFunction(float(value))
    if callable(value):
        return CallableFunction(value)
    raise TypeError(f"cannot interpret {value!r} as an edge function")


def _per_edge(tree, value, what):
    if isinstance(value, Mapping):
        missing = [e for e in tree.edge_ids if e not in value]
        if missing:
            raise CoefficientError(f"{what} missing for edges {missing}")
        return {e: value[e] for e in tree.edge_ids}
    return {e: value for e in tree.edge_ids}


class Coefficients:
    """Per-edge ``p``, ``q`` and constant weights ``rho``.

    Each argument is either a mapping edge id -> value or a single value used
    on every edge.  Values may be expression strings, numbers, callables or
    :class:`EdgeFunction` objects; ``rho`` values must be positive numbers.
    """

    def __init__(self, tree: TreeGraph, p="1", q="0", rho=1.0):
        self.tree = tree
        self.p = {e: as_edge_function(v) for e, v in _per_edge(tree, p, "p").items()}
        self.q = {e: as_edge_function(v) for e, v in _per_edge(tree, q, "q").items()}
        self.rho = {e: float(v) for e, v in _per_edge(tree, rho, "rho").items()}
        for e, r in self.rho.items():
            if not (r > 0.0 and math.isfinite(r)):
                raise NonPositiveRho(f"rho on edge {e!r} is {r}")

    def __repr__(self):
        return f"Coefficients(m={self.tree.m})"


@dataclass(frozen=True)
class RiverData:
    """Advection-diffusion data: diffusivity ``D`` and velocity ``v`` per edge.

    Velocities are signed along each edge's parametrization.  ``root``
    defaults to the tree's root.
    """

    D: Mapping
    v: Mapping
    sigma: float
    root: Hashable = None
    rho: Mapping | float = 1.0


def river_coefficients(t: TreeGraph, r: RiverData) -> Coefficients:
    """Integrating-factor coefficients for the resolvent of ``D f'' - v f'``.

    ``p`` is the exponential of minus the path integral of ``v/D`` from the
    root, and ``q = sigma p / D``.  On each edge ``p_e(x) = p(tail) *
    exp(-(v_e/D_e) x)``, so that ``p_e'/p_e = -v_e/D_e`` and ``(p/D)(sigma f
    - D f'' + v f') = -(p f')' + q f``.
    """
    root = r.root if r.root is not None else t.root
    if root is None:
        raise NoRootDesignated("river coefficients need a root node")
    if root not in t.nodes:
        raise NoRootDesignated(f"root {root!r} is not a node")
    if not r.sigma > 0:
        raise CoefficientError("sigma must be positive")
    D = _per_edge(t, r.D, "D")
    v = _per_edge(t, r.v, "v")
    for e, d in D.items():
        if not d > 0:
            raise CoefficientError(f"D on edge {e!r} must be positive, got {d}")
    if t.root != root:
        t = dataclasses.replace(t, root=root)

    # propagate the node values of p outward from the root
    log_p = {root: 0.0}
    for node in t.nodes_from_root()[1:]:
        e = t.edge(t.parent_edge(node))
        rate = v[e.id] / D[e.id]
        if node == e.head:
            log_p[node] = log_p[e.tail] - rate * e.length
        else:
            log_p[node] = log_p[e.head] + rate * e.length

    p, q = {}, {}
    for e in t.edges:
        rate = float(v[e.id]) / float(D[e.id])
        lp0 = log_p[e.tail]
        coef = float(r.sigma) / float(D[e.id])
        p[e.id] = CallableFunction(
            lambda x, lp0=lp0, rate=rate: np.exp(lp0 - rate * x),
            f"exp({lp0!r} - {rate!r}*x)",
        )
        q[e.id] = CallableFunction(
            lambda x, lp0=lp0, rate=rate, coef=coef: coef * np.exp(lp0 - rate * x),
            f"{coef!r}*exp({lp0!r} - {rate!r}*x)",
        )
    coeffs = Coefficients(t, p=p, q=q, rho=r.rho)
    coeffs.node_log_p = log_p
    return coeffs


@dataclass(frozen=True)
class ValidationReport:
    min_p: float
    max_abs_q: float
    min_rho: float
    ok: bool


def validate(c: Coefficients, t: TreeGraph | None = None, n_samples: int = 101) -> ValidationReport:
    """Sample ``p`` and ``q`` on every edge and check ``inf p > 0``."""
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    t = t or c.tree
    min_p, max_q = math.inf, 0.0
    for e in t.edges:
        xs = np.linspace(0.0, e.length, n_samples)
        pv = np.asarray(c.p[e.id](xs))
        qv = np.asarray(c.q[e.id](xs))
        if not (np.all(np.isfinite(pv)) and np.all(np.isfinite(qv))):
            raise CoefficientEvaluationError(f"non-finite coefficient on edge {e.id!r}")
        min_p = min(min_p, float(pv.min()))
        max_q = max(max_q, float(np.abs(qv).max()))
        if pv.min() <= 0.0:
            raise NonPositiveP(f"p reaches {pv.min():g} on edge {e.id!r}")
    min_rho = min(c.rho.values())
    if min_rho <= 0.0:
        raise NonPositiveRho(f"rho reaches {min_rho}")
    return ValidationReport(min_p, max_q, min_rho, True)


def node_jumps_p(c: Coefficients, t: TreeGraph | None = None) -> dict:
    """Relative spread ``(max - min) / max`` of the values of ``p`` at each
    internal node over its incident edges."""
    t = t or c.tree
    out = {}
    for node in t.internal:
        vals = []
        for eid in t.node_class.incidence[node]:
            e = t.edge(eid)
            vals.append(float(c.p[eid](e.coord(e.end(node)))))
        out[node] = (max(vals) - min(vals)) / max(vals)
    return out


def check_p_continuous(c: Coefficients, t: TreeGraph | None = None, rtol: float = 1e-8):
    """Raise :class:`DiscontinuousP` unless ``p`` is continuous at every
    internal node to relative tolerance ``rtol``.

    With the flux condition ``sum rho_e f'^b = 0`` the quantity
    ``sum rho_e p_e W[f, g]^b`` only vanishes at a node when the ``p_e`` agree
    there, and the kernel construction relies on it.
    """
    for node, jump in node_jumps_p(c, t).items():
        if jump > rtol:
            raise DiscontinuousP(f"p jumps by a relative {jump:.3g} at node {node!r}")
