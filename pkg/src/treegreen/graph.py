"""Finite metric tree graphs.

A tree is a set of nodes joined by edges ``(id, tail, head, length)``.  Each
edge is parametrized by a local coordinate ``x`` in ``[0, length]`` with the
tail at ``x = 0`` and the head at ``x = length``.  Points on the graph are
:class:`GraphPoint` pairs ``(edge, x)``.

Only the combinatorics and the edge lengths matter; no geometric embedding is
stored.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Hashable, Iterable, Sequence

from .errors import (
    CoincidentPoints,
    CycleDetected,
    DanglingEndpoint,
    Disconnected,
    NoRootDesignated,
    NonPositiveLength,
    OutOfDomain,
    PointAtNode,
)

__all__ = [
    "Edge",
    "GraphPoint",
    "NodeClass",
    "PathSegment",
    "Side",
    "SubtreeSide",
    "TreeGraph",
    "build_tree",
    "node_key",
    "split",
    "locate_side",
    "path_from_root",
]

TAIL, HEAD = 0, 1


def node_key(node):
    """Sort key giving a deterministic order over mixed int/str ids."""
    if isinstance(node, int):
        return (0, node, "")
    return (1, 0, str(node))


@dataclass(frozen=True)
class Edge:
    id: Hashable
    tail: Hashable
    head: Hashable
    length: float

    def end(self, node) -> int:
        """Which end (TAIL or HEAD) of this edge sits at ``node``."""
        if node == self.tail:
            return TAIL
        if node == self.head:
            return HEAD
        raise KeyError(f"node {node!r} is not an endpoint of edge {self.id!r}")

    def coord(self, end: int) -> float:
        return 0.0 if end == TAIL else self.length

    def node(self, end: int):
        return self.tail if end == TAIL else self.head

    def other(self, node):
        return self.head if node == self.tail else self.tail


@dataclass(frozen=True)
class GraphPoint:
    edge: Hashable
    x: float

    @classmethod
    def parse(cls, text: str, tree: "TreeGraph | None" = None) -> "GraphPoint":
        """Parse ``"EDGE:POS"``; edge ids are matched against ``tree`` if given."""
        name, sep, pos = text.rpartition(":")
        if not sep or not name:
            raise ValueError(f"expected EDGE:POS, got {text!r}")
        edge = name
        if tree is not None:
            edge = tree.edge_id(name)
        return cls(edge, float(pos))


@dataclass(frozen=True)
class NodeClass:
    boundary: tuple
    internal: tuple
    incidence: dict

    def degree(self, node) -> int:
        return len(self.incidence[node])


class Side(Enum):
    GAMMA = "gamma"
    LAMBDA = "lambda"


@dataclass(frozen=True)
class SubtreeSide:
    """One of the two components of the tree cut at an interior point.

    ``intervals`` maps every member edge to the sub-interval of its local
    coordinate that belongs to this side.
    """

    side: Side
    cut: GraphPoint
    intervals: dict
    nodes: frozenset

    @property
    def total_length(self) -> float:
        return sum(b - a for a, b in self.intervals.values())


@dataclass(frozen=True)
class PathSegment:
    """Traversal of (part of) an edge: from local coordinate ``start`` to ``end``.

    ``direction`` is +1 when travelling with the edge parametrization and -1
    against it.
    """

    edge: Hashable
    direction: int
    start: float
    end: float

    @property
    def length(self) -> float:
        return abs(self.end - self.start)


@dataclass(frozen=True, eq=False)
class TreeGraph:
    nodes: tuple
    edges: tuple
    root: Hashable = None
    _edge_index: dict = field(repr=False, default=None)

    @property
    def m(self) -> int:
        return len(self.edges)

    def __len__(self):
        return len(self.edges)

    def edge(self, edge_id) -> Edge:
        return self.edges[self._edge_index[edge_id]]

    def index(self, edge_id) -> int:
        """Position of an edge in declaration order."""
        return self._edge_index[edge_id]

    def edge_id(self, name):
        """Resolve an edge id given possibly as its string form."""
        if name in self._edge_index:
            return name
        for e in self.edges:
            if str(e.id) == str(name):
                return e.id
        raise KeyError(f"unknown edge {name!r}")

    @property
    def edge_ids(self) -> list:
        return [e.id for e in self.edges]

    @property
    def total_length(self) -> float:
        return sum(e.length for e in self.edges)

    @cached_property
    def node_class(self) -> NodeClass:
        incidence = {n: [] for n in self.nodes}
        for e in self.edges:
            incidence[e.tail].append(e.id)
            incidence[e.head].append(e.id)
        incidence = {
            n: tuple(sorted(ids, key=node_key)) for n, ids in incidence.items()
        }
        boundary = tuple(n for n in self.nodes if len(incidence[n]) == 1)
        internal = tuple(n for n in self.nodes if len(incidence[n]) > 1)
        return NodeClass(boundary, internal, incidence)

    @property
    def boundary(self) -> tuple:
        return self.node_class.boundary

    @property
    def internal(self) -> tuple:
        return self.node_class.internal

    def point(self, edge_id, x: float) -> GraphPoint:
        """Validated :class:`GraphPoint`."""
        e = self.edge(edge_id)
        if not 0.0 <= x <= e.length:
            raise OutOfDomain(f"x={x} outside [0, {e.length}] on edge {edge_id!r}")
        return GraphPoint(edge_id, float(x))

    def node_point(self, node, edge_id=None) -> GraphPoint:
        """A representation ``(e, 0)`` or ``(e, l_e)`` of ``node``."""
        incident = self.node_class.incidence[node]
        if edge_id is None:
            edge_id = incident[0]
        elif edge_id not in incident:
            raise KeyError(f"edge {edge_id!r} is not incident to {node!r}")
        e = self.edge(edge_id)
        return GraphPoint(edge_id, e.coord(e.end(node)))

    def at_node(self, p: GraphPoint):
        """The node a point coincides with, or None for interior points."""
        e = self.edge(p.edge)
        if p.x == 0.0:
            return e.tail
        if p.x == e.length:
            return e.head
        return None

    def _component(self, start, removed_edge) -> frozenset:
        seen = {start}
        queue = deque([start])
        inc = self.node_class.incidence
        while queue:
            n = queue.popleft()
            for eid in inc[n]:
                if eid == removed_edge:
                    continue
                nb = self.edge(eid).other(n)
                if nb not in seen:
                    seen.add(nb)
                    queue.append(nb)
        return frozenset(seen)

    @cached_property
    def _tail_sides(self) -> dict:
        # nodes reachable from each edge's tail once the edge itself is removed
        return {e.id: self._component(e.tail, e.id) for e in self.edges}

    def tail_side_nodes(self, edge_id) -> frozenset:
        return self._tail_sides[edge_id]

    def head_side_nodes(self, edge_id) -> frozenset:
        return frozenset(self.nodes) - self._tail_sides[edge_id]

    def edges_among(self, nodes: Iterable, exclude=None) -> list:
        nodes = set(nodes)
        return [
            e.id for e in self.edges
            if e.id != exclude and e.tail in nodes and e.head in nodes
        ]

    @cached_property
    def _root_tree(self):
        if self.root is None:
            raise NoRootDesignated("no root node designated")
        parent_edge = {self.root: None}
        order = [self.root]
        queue = deque([self.root])
        inc = self.node_class.incidence
        while queue:
            n = queue.popleft()
            for eid in inc[n]:
                nb = self.edge(eid).other(n)
                if nb not in parent_edge:
                    parent_edge[nb] = eid
                    order.append(nb)
                    queue.append(nb)
        return parent_edge, order

    def parent_edge(self, node):
        """Edge leading from ``node`` towards the root (None at the root)."""
        return self._root_tree[0][node]

    def nodes_from_root(self) -> list:
        """Nodes in breadth-first order starting at the root."""
        return list(self._root_tree[1])


def build_tree(nodes: Sequence, edges: Sequence, root=None) -> TreeGraph:
    """Validate and build a :class:`TreeGraph`.

    Parameters
    ----------
    nodes : sequence of hashable
        Node ids.
    edges : sequence
        Items ``(id, tail, head, length)`` or :class:`Edge` instances.
    root : hashable, optional
        Designated root node.
    """
    node_list = list(dict.fromkeys(nodes))
    node_set = set(node_list)
    edge_list = []
    for item in edges:
        e = item if isinstance(item, Edge) else Edge(*item)
        e = Edge(e.id, e.tail, e.head, float(e.length))
        for end in (e.tail, e.head):
            if end not in node_set:
                raise DanglingEndpoint(f"edge {e.id!r} refers to undeclared node {end!r}")
        if not (0.0 < e.length < float("inf")):
            raise NonPositiveLength(f"edge {e.id!r} has length {e.length}")
        edge_list.append(e)

    ids = [e.id for e in edge_list]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate edge ids")
    if root is not None and root not in node_set:
        raise DanglingEndpoint(f"root {root!r} is not a declared node")

    # union-find: a joining edge inside one component closes a cycle
    parent = {n: n for n in node_list}

    def find(n):
        while parent[n] != n:
            parent[n] = parent[parent[n]]
            n = parent[n]
        return n

    for e in edge_list:
        a, b = find(e.tail), find(e.head)
        if a == b:
            raise CycleDetected(f"edge {e.id!r} closes a cycle")
        parent[a] = b
    if len({find(n) for n in node_list}) != 1 or not edge_list:
        raise Disconnected("graph is not connected")
    assert len(node_list) == len(edge_list) + 1

    return TreeGraph(
        nodes=tuple(sorted(node_list, key=node_key)),
        edges=tuple(edge_list),
        root=root,
        _edge_index={eid: i for i, eid in enumerate(ids)},
    )


def _check_interior(t: TreeGraph, p: GraphPoint) -> Edge:
    e = t.edge(p.edge)
    if not 0.0 < p.x < e.length:
        raise PointAtNode(f"{p} is not interior to edge {p.edge!r}")
    return e


def split(t: TreeGraph, p: GraphPoint) -> tuple[SubtreeSide, SubtreeSide]:
    """Cut the tree at an interior point.

    Returns the (gamma, lambda) sides; gamma is the component containing the
    tail ``(e, 0)`` of the cut edge.
    """
    e = _check_interior(t, p)
    gamma_nodes = t.tail_side_nodes(e.id)
    lambda_nodes = t.head_side_nodes(e.id)
    sides = []
    for side, nodes, own in (
        (Side.GAMMA, gamma_nodes, (0.0, p.x)),
        (Side.LAMBDA, lambda_nodes, (p.x, e.length)),
    ):
        intervals = {eid: (0.0, t.edge(eid).length) for eid in t.edges_among(nodes, exclude=e.id)}
        intervals[e.id] = own
        sides.append(SubtreeSide(side, p, intervals, nodes))
    return sides[0], sides[1]


def locate_side(t: TreeGraph, cut: GraphPoint, y: GraphPoint) -> Side:
    """Which side of the cut at ``cut`` the point ``y`` lies on."""
    e = _check_interior(t, cut)
    if y.edge == e.id:
        if y.x == cut.x:
            raise CoincidentPoints(f"{y} coincides with the cut")
        return Side.GAMMA if y.x < cut.x else Side.LAMBDA
    # y is on another edge, whose nodes all lie on one side
    ye = t.edge(y.edge)
    return Side.GAMMA if ye.tail in t.tail_side_nodes(e.id) else Side.LAMBDA


def path_from_root(t: TreeGraph, p: GraphPoint) -> list[PathSegment]:
    """Ordered segments of the unique path from the root to ``p``."""
    parent_of = t._root_tree[0]
    e = t.edge(p.edge)
    # enter p's edge from whichever endpoint is nearer the root
    if parent_of[e.head] == e.id:
        entry, direction = e.tail, +1
    else:
        entry, direction = e.head, -1
    start = e.coord(e.end(entry))
    if entry == t.root and p.x == start:
        return []

    segments = []
    n = entry
    while n != t.root:
        pe = t.edge(parent_of[n])
        up = pe.other(n)
        # traverse pe from `up` towards `n`
        if pe.tail == up:
            segments.append(PathSegment(pe.id, +1, 0.0, pe.length))
        else:
            segments.append(PathSegment(pe.id, -1, pe.length, 0.0))
        n = up
    segments.reverse()
    if p.x != start:
        segments.append(PathSegment(e.id, direction, start, p.x))
    return segments
