"""JSON problem configuration.

Example::

    {
      "nodes": ["phi", "n", "b1", "b2"],
      "edges": [{"id": "e0", "tail": "phi", "head": "n", "length": 1.0}, ...],
      "root": "phi",
      "coefficients": {"mode": "per_edge",
                       "per_edge": {"e0": {"p": "1", "q": "0", "rho": 1.0}, ...}},
      "boundary": {"phi": "dirichlet", "b1": "neumann", "b2": {"robin": [1, 2]}},
      "rhs": {"e0": "1", ...},
      "c": [0, 0, 0, 0, 0, 0],
      "tol": {"ode": 1e-10, "quad": 1e-9}
    }

``coefficients`` may instead be ``{"mode": "river", "river": {"D": {...},
"v": {...}, "sigma": 1.0, "rho": {...}}}``.  JSON object keys are strings, so
edge and node ids in mappings are matched by their string form.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .coeffs import Coefficients, RiverData, parse_expression, river_coefficients, validate
from .conditions import BoundaryCondition
from .errors import ConfigError, TreeGreenError
from .graph import TreeGraph, build_tree

__all__ = ["ProblemConfig", "Problem", "load_config", "parse_config"]

DEFAULT_TOL = {"ode": 1e-10, "quad": 1e-9}


@dataclass
class Problem:
    tree: TreeGraph
    coeffs: Coefficients
    bc: dict
    rhs: dict | None
    c: list | None
    tol: dict


def _id(value, where):
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise ConfigError("ids must be strings or integers", where)
    return value


def _number(value, where, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", where)
    if positive and not value > 0:
        raise ConfigError(f"must be positive, got {value!r}", where)
    return float(value)


def _expr(value, where):
    if isinstance(value, bool):
        raise ConfigError("expected an expression", where)
    if isinstance(value, (int, float)):
        return repr(float(value))
    if not isinstance(value, str) or not value.strip():
        raise ConfigError("expected a non-empty expression string", where)
    return value


def _keyed(mapping, ids, where, required=True):
    """Re-key a JSON object by the matching ids."""
    if not isinstance(mapping, dict):
        raise ConfigError("expected an object", where)
    by_str = {str(i): i for i in ids}
    out = {}
    for k, v in mapping.items():
        if str(k) not in by_str:
            raise ConfigError(f"unknown id {k!r}", f"{where}.{k}")
        out[by_str[str(k)]] = v
    if required:
        missing = [i for i in ids if i not in out]
        if missing:
            raise ConfigError(f"missing entries for {missing}", where)
    return out


@dataclass
class ProblemConfig:
    nodes: list
    edges: list
    root: Any = None
    coefficients: dict = field(default_factory=dict)
    boundary: dict = field(default_factory=dict)
    rhs: dict | None = None
    c: list | None = None
    tol: dict = field(default_factory=lambda: dict(DEFAULT_TOL))

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemConfig":
        if not isinstance(data, dict):
            raise ConfigError("top level must be an object")
        known = {"nodes", "edges", "root", "coefficients", "boundary", "rhs", "c", "tol"}
        extra = sorted(set(data) - known)
        if extra:
            raise ConfigError(f"unknown fields {extra}")

        if "nodes" not in data:
            raise ConfigError("missing", "nodes")
        if not isinstance(data["nodes"], list) or not data["nodes"]:
            raise ConfigError("expected a non-empty list", "nodes")
        nodes = [_id(n, f"nodes[{i}]") for i, n in enumerate(data["nodes"])]

        if not isinstance(data.get("edges"), list) or not data["edges"]:
            raise ConfigError("expected a non-empty list", "edges")
        edges = []
        for i, item in enumerate(data["edges"]):
            where = f"edges[{i}]"
            if not isinstance(item, dict):
                raise ConfigError("expected an object", where)
            for key in ("id", "tail", "head", "length"):
                if key not in item:
                    raise ConfigError("missing", f"{where}.{key}")
            extra = sorted(set(item) - {"id", "tail", "head", "length"})
            if extra:
                raise ConfigError(f"unknown fields {extra}", where)
            edges.append({
                "id": _id(item["id"], f"{where}.id"),
                "tail": _id(item["tail"], f"{where}.tail"),
                "head": _id(item["head"], f"{where}.head"),
                "length": _number(item["length"], f"{where}.length", positive=True),
            })
        edge_ids = [e["id"] for e in edges]
        node_by_str = {str(n): n for n in nodes}

        root = data.get("root")
        if root is not None:
            if str(root) not in node_by_str:
                raise ConfigError(f"unknown node {root!r}", "root")
            root = node_by_str[str(root)]

        coefficients = cls._parse_coefficients(data.get("coefficients"), edge_ids, node_by_str)

        boundary = {}
        for k, v in _keyed(data.get("boundary", {}), nodes, "boundary", required=False).items():
            try:
                cond = BoundaryCondition.coerce(v)
            except (ValueError, TypeError) as exc:
                raise ConfigError(str(exc), f"boundary.{k}") from None
            boundary[k] = cond

        rhs = None
        if data.get("rhs") is not None:
            rhs = {k: _expr(v, f"rhs.{k}") for k, v in _keyed(data["rhs"], edge_ids, "rhs").items()}

        c = None
        if data.get("c") is not None:
            if not isinstance(data["c"], list) or len(data["c"]) != 2 * len(edges):
                raise ConfigError(f"expected a list of {2 * len(edges)} numbers", "c")
            c = [_number(v, f"c[{i}]") for i, v in enumerate(data["c"])]

        tol = dict(DEFAULT_TOL)
        if data.get("tol") is not None:
            if not isinstance(data["tol"], dict) or set(data["tol"]) - {"ode", "quad"}:
                raise ConfigError("expected an object with keys ode, quad", "tol")
            for k, v in data["tol"].items():
                tol[k] = _number(v, f"tol.{k}", positive=True)

        return cls(nodes, edges, root, coefficients, boundary, rhs, c, tol)

    @staticmethod
    def _parse_coefficients(coeffs, edge_ids, node_by_str):
        where = "coefficients"
        if not isinstance(coeffs, dict):
            raise ConfigError("missing or not an object", where)
        mode = coeffs.get("mode")
        if mode == "per_edge":
            per_edge = _keyed(coeffs.get("per_edge"), edge_ids, f"{where}.per_edge")
            out = {}
            for eid, entry in per_edge.items():
                w = f"{where}.per_edge.{eid}"
                if not isinstance(entry, dict) or set(entry) - {"p", "q", "rho"}:
                    raise ConfigError("expected an object with keys p, q, rho", w)
                out[eid] = {
                    "p": _expr(entry.get("p", "1"), f"{w}.p"),
                    "q": _expr(entry.get("q", "0"), f"{w}.q"),
                    "rho": _number(entry.get("rho", 1.0), f"{w}.rho", positive=True),
                }
            return {"mode": "per_edge", "per_edge": out}
        if mode == "river":
            river = coeffs.get("river")
            w = f"{where}.river"
            if not isinstance(river, dict):
                raise ConfigError("missing or not an object", w)
            if set(river) - {"D", "v", "sigma", "rho"}:
                raise ConfigError("allowed keys are D, v, sigma, rho", w)
            D = {k: _number(v, f"{w}.D.{k}", positive=True)
                 for k, v in _keyed(river.get("D"), edge_ids, f"{w}.D").items()}
            vel = {k: _number(v, f"{w}.v.{k}")
                   for k, v in _keyed(river.get("v"), edge_ids, f"{w}.v").items()}
            if "sigma" not in river:
                raise ConfigError("missing", f"{w}.sigma")
            sigma = _number(river["sigma"], f"{w}.sigma", positive=True)
            rho = {k: 1.0 for k in edge_ids}
            if river.get("rho") is not None:
                rho = {k: _number(v, f"{w}.rho.{k}", positive=True)
                       for k, v in _keyed(river["rho"], edge_ids, f"{w}.rho").items()}
            return {"mode": "river", "river": {"D": D, "v": vel, "sigma": sigma, "rho": rho}}
        raise ConfigError("mode must be 'per_edge' or 'river'", f"{where}.mode")

    def to_dict(self) -> dict:
        """Normalized JSON-compatible form; ``from_dict`` inverts it."""
        def keyed(m):
            return {str(k): v for k, v in m.items()}

        coeffs = self.coefficients
        if coeffs["mode"] == "per_edge":
            c_out = {"mode": "per_edge", "per_edge": keyed(coeffs["per_edge"])}
        else:
            r = coeffs["river"]
            c_out = {"mode": "river", "river": {
                "D": keyed(r["D"]), "v": keyed(r["v"]), "sigma": r["sigma"], "rho": keyed(r["rho"]),
            }}
        boundary = {}
        for node, cond in self.boundary.items():
            boundary[str(node)] = cond.kind if cond.kind != "robin" else {"robin": [cond.alpha, cond.beta]}
        return {
            "nodes": list(self.nodes),
            "edges": [dict(e) for e in self.edges],
            "root": self.root,
            "coefficients": c_out,
            "boundary": boundary,
            "rhs": keyed(self.rhs) if self.rhs is not None else None,
            "c": list(self.c) if self.c is not None else None,
            "tol": dict(self.tol),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)

    def build(self) -> Problem:
        """Construct the tree, coefficients and boundary conditions."""
        try:
            tree = build_tree(
                self.nodes,
                [(e["id"], e["tail"], e["head"], e["length"]) for e in self.edges],
                root=self.root,
            )
            extra = [n for n in self.boundary if n not in tree.boundary]
            if extra:
                raise ConfigError(f"nodes {extra} are not boundary nodes", "boundary")
            mode = self.coefficients["mode"]
            if mode == "per_edge":
                pe = self.coefficients["per_edge"]
                coeffs = Coefficients(
                    tree,
                    p={k: v["p"] for k, v in pe.items()},
                    q={k: v["q"] for k, v in pe.items()},
                    rho={k: v["rho"] for k, v in pe.items()},
                )
            else:
                r = self.coefficients["river"]
                if tree.root is None:
                    raise ConfigError("river coefficients need a root", "root")
                coeffs = river_coefficients(tree, RiverData(r["D"], r["v"], r["sigma"], tree.root, r["rho"]))
                tree = coeffs.tree
            validate(coeffs, tree, n_samples=201)
            for eid, text in (self.rhs or {}).items():
                try:
                    parse_expression(text)
                except TreeGreenError as exc:
                    raise ConfigError(str(exc), f"rhs.{eid}") from None
        except ConfigError:
            raise
        except TreeGreenError as exc:
            raise ConfigError(f"{type(exc).__name__}: {exc}") from None
        return Problem(tree, coeffs, dict(self.boundary), self.rhs, self.c, dict(self.tol))


def parse_config(text: str) -> ProblemConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", f"line {exc.lineno}, column {exc.colno}") from None
    return ProblemConfig.from_dict(data)


def load_config(path) -> ProblemConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
