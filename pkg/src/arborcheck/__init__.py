"""Exact invariants of resolution dual graphs of normal surface
singularities: dual divisors, brackets, angular distances, u_L / u_lambda
quotients, arborescence and ultrametricity checks, brick-vertex trees and
tree hulls."""

from .dualgraph import (
    BlowupSpec,
    DualGraph,
    GenericGraph,
    blowup,
    graph_from_json,
    graph_to_json,
    is_arborescent,
    separates,
    validate,
)
from .lattice import (
    BracketTable,
    branch_exc_transform,
    branch_intersection,
    brackets,
    crucial_check,
    divisor_intersection,
    dual_basis,
    intersection_matrix,
    q_value,
    spherical_angle,
)
from .bricks import (
    BlockDecomposition,
    BrickVertexTree,
    FTree,
    Tree,
    as_F_tree,
    block_decomposition,
    brick_vertex_tree,
    convex_hull,
    f_tree_isomorphic,
    hull_valency_report,
    tree_separates,
)
from .treemetric import (
    FiniteMetric,
    LogLength,
    MetricTreeHull,
    UltraTree,
    four_point_check,
    is_ultrametric,
    rho_metric,
    subtle_check,
    tree_hull,
    u_L_table,
    ultra_tree,
    ultram_theorem_check,
)
from .valuation import (
    Curve,
    Divisorial,
    NoudWitness,
    QuasiMonomial,
    noud_counterexample,
    parse_valuation,
    u_lambda,
    udbv_hypothesis_check,
    val_bracket,
    val_fourpoint,
    z_divisor,
)
from .rational import INFINITE, format_rational, parse_rational

__version__ = "0.1.0"
