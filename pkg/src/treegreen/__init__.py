"""Green's functions of Sturm-Liouville problems on metric trees.

Solves ``-(p f')' + q f = h`` on the edges of a finite tree with continuity,
weighted flux balance at internal nodes and Dirichlet, Neumann or Robin
conditions at boundary nodes, by constructing the Green's function from
kernel solutions of the edge ODEs.  A Pokornyi-type kernel and a
finite-difference discretization are provided as independent checks.
"""
from .coeffs import Coefficients, RiverData, river_coefficients, validate
from .compare import compare_oracle, compare_pokornyi
from .conditions import BoundaryCondition, delta_matrix, standard_functionals
from .config import ProblemConfig, load_config, parse_config
from .edgeode import fundamental_basis, integrate_edge
from .errors import *  # noqa: F401,F403
from .function import FunctionOnGraph
from .graph import GraphPoint, TreeGraph, build_tree, locate_side, path_from_root, split
from .green import GreensFunction
from .oracle import discretize, oracle_green, oracle_solve

__version__ = "0.1.0"

__all__ = [
    "BoundaryCondition",
    "Coefficients",
    "FunctionOnGraph",
    "GraphPoint",
    "GreensFunction",
    "ProblemConfig",
    "RiverData",
    "TreeGraph",
    "build_tree",
    "compare_oracle",
    "compare_pokornyi",
    "delta_matrix",
    "discretize",
    "fundamental_basis",
    "integrate_edge",
    "load_config",
    "locate_side",
    "oracle_green",
    "oracle_solve",
    "parse_config",
    "path_from_root",
    "river_coefficients",
    "split",
    "standard_functionals",
    "validate",
]
