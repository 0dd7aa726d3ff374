"""
A small river network
=====================

The resolvent of the advection-diffusion operator D f'' - v f' on a river
network, with absorbing outlet and reflecting or partially reflecting
upstream ends, becomes a Sturm-Liouville problem after multiplying by the
integrating factor p = exp(-int v/D).  The network below drains into the
outlet phi; velocities are given along each edge's own orientation.
"""

import numpy as np

from treegreen import GraphPoint, GreensFunction, RiverData, build_tree, river_coefficients
from treegreen.coeffs import node_jumps_p

tree = build_tree(
    ["phi", "n", "b1", "b2"],
    [("e0", "phi", "n", 1.0), ("e1", "n", "b1", 0.7), ("e2", "n", "b2", 1.3)],
    root="phi",
)
data = RiverData(
    D={"e0": 1.0, "e1": 0.5, "e2": 2.0},
    v={"e0": 0.8, "e1": -0.3, "e2": 1.5},
    sigma=1.5,
    rho={"e0": 1.0, "e1": 2.0, "e2": 3.0},
)
coeffs = river_coefficients(tree, data)
print("log p at nodes:", {k: round(v, 6) for k, v in coeffs.node_log_p.items()})
print("largest relative jump of p at a node:", max(node_jumps_p(coeffs, tree).values()))

bc = {"b1": "neumann", "b2": ("robin", 1.0, 0.5)}
g = GreensFunction(tree, coeffs, bc)

# response at a few places to a point release at (e2, 0.4)
src = GraphPoint("e2", 0.4)
for e in tree.edges:
    xs = np.linspace(0.1, 0.9, 5) * e.length
    print(e.id, np.round([g(GraphPoint(e.id, x), src) for x in xs], 6))

# steady load 1 + x on the trunk only
f = g.green_apply({"e0": "1 + x", "e1": "0", "e2": "0"})
print("f at the upstream ends:", f("e1", 0.7), f("e2", 1.3))
print("node functionals:", np.round(g.functional_values(f), 12))
