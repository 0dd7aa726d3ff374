"""
A three-edge star
=================

Three unit edges meet at an internal node n.  At n the function is
continuous and the weighted boundary derivatives sum to zero; the three
outer ends are Dirichlet.  With p = 1, q = 0 and unit weights the kernel
solutions are piecewise linear, so values can be checked by hand:
G((e0, .5), (e1, .5)) = 1/12, and the solution of -f'' = 1 has f(n) = 1/2.
"""

import numpy as np

from treegreen import Coefficients, GraphPoint, GreensFunction, build_tree

tree = build_tree(
    ["phi", "n", "b1", "b2"],
    [("e0", "phi", "n", 1.0), ("e1", "n", "b1", 1.0), ("e2", "n", "b2", 1.0)],
    root="phi",
)
print("boundary nodes:", tree.boundary, " internal:", tree.internal)

g = GreensFunction(tree, Coefficients(tree))
print("det Delta =", g.delta.det, " rcond =", g.delta.rcond)
print("G((e0,.5),(e1,.5)) =", g(GraphPoint("e0", 0.5), GraphPoint("e1", 0.5)), "(1/12 =", 1 / 12, ")")

f = g.green_apply(1.0)
print("f at n      =", f("e0", 1.0))
print("f on e0     =", f("e0", np.linspace(0, 1, 5)))
print("node values =", g.functional_values(f))

# unequal weights rho make the problem non-symmetric in dy but the kernel
# with respect to rho dy stays symmetric
g2 = GreensFunction(tree, Coefficients(tree, rho={"e0": 1.0, "e1": 2.0, "e2": 3.0}))
x, y = GraphPoint("e1", 0.3), GraphPoint("e2", 0.8)
print("rho=(1,2,3): G(x,y) =", g2(x, y), " G(y,x) =", g2(y, x))
# the interval-kernel construction gives the kernel with respect to dy
print("             rho_y G(x,y) =", 3.0 * g2(x, y), " Pokornyi =", g2.pokornyi_green(x, y))
