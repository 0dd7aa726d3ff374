"""
The Green's function of -f'' on an interval
===========================================

A single edge with Dirichlet ends is the smallest tree.  Its Green's function
is known in closed form, G(x, y) = min(x, y) (1 - max(x, y)), so it is a good
place to see the pieces of the construction.
"""

import numpy as np

from treegreen import Coefficients, GraphPoint, GreensFunction, build_tree

# one edge from node a (x = 0) to node b (x = 1)
tree = build_tree(["a", "b"], [("e", "a", "b", 1.0)])
coeffs = Coefficients(tree, p="1", q="0")
g = GreensFunction(tree, coeffs)

# the two kernel solutions attached to the edge: psi_gamma vanishes at a,
# psi_lambda at b, and they are scaled so that p W = -1
pair = g.pairs["e"]
xs = np.linspace(0, 1, 5)
print("psi_gamma  :", pair.psi_gamma("e", xs)[0])
print("psi_lambda :", pair.psi_lambda("e", xs)[0])
print("p W        :", pair.pw(xs))

# kernel values against the closed form
for x, y in [(0.5, 0.25), (0.25, 0.5), (0.9, 0.1)]:
    val = g(GraphPoint("e", x), GraphPoint("e", y))
    print(f"G({x}, {y}) = {val:.12f}   closed form {min(x, y) * (1 - max(x, y)):.12f}")

# the Green operator solves -f'' = 1 with f(0) = f(1) = 0
f = g.green_apply("1")
print("f(x)       :", f("e", xs))
print("x(1-x)/2   :", xs * (1 - xs) / 2)

# a potential term changes the kernel; compare with sinh(x) sinh(1-x) / sinh(1)
g1 = GreensFunction(tree, Coefficients(tree, q="1"))
print("q=1: G(0.5, 0.5) =", g1(GraphPoint("e", 0.5), GraphPoint("e", 0.5)),
      " closed form", np.sinh(0.5) ** 2 / np.sinh(1.0))

# only two linear solves with the node-condition matrix were needed,
# one per boundary node
print("solves:", g.solve_count)
