"""Jet-space metric geometry for Whitney-type extension problems.

The library computes the two-point metric and norms on fields of k-jets
relative to a modulus of continuity, solves Lipschitz selection problems
over convex sets of polynomials exactly by LP and constructively through
a Helly/tree recursion, and runs seeded finiteness experiments at desk
scale.
"""

from .errors import (
    BracketError,
    CapProximityWarning,
    DegenerateChainError,
    DomainError,
    GenerationError,
    InvariantError,
    JetSpaceError,
    ModelingError,
    SchemaError,
    SelectionHypothesisError,
    SolverError,
)
from .harness import (
    ExperimentConfig,
    FinitenessReport,
    constructive_vs_optimal,
    finiteness_experiment,
    generate_hidden_field,
    generate_instance,
    two_point_finiteness_check,
)
from .jets import (
    MAX_K,
    Constants,
    Jet,
    Poly,
    Space,
    derivative_eval,
    derivative_transfer_bound,
    jet_scale,
    taylor_shift,
)
from .lp import LpResult, feasible_point, solve_lp, solve_lp_exact
from .metric import (
    ChainContractionReport,
    MetricCtx,
    MetricInterval,
    chain_contraction_check,
    chain_metric_bounds,
    chain_upper_bound_search,
    one_point_delta,
    two_point_delta,
)
from .moduli import Modulus, PhiAlpha, invert_monotone, modulus_eval, phi_alpha_eval, phi_alpha_inverse_bound
from .polytopes import ConvexSetSpec, HellyReport, helly_check, intersection_point
from .selection import (
    Instance,
    SelectionResult,
    bounded_constructive_selection,
    constructive_selection,
    min_lambda_selection,
    selection_feasible,
    selection_feasible_exact,
)
from .trees import DistortionTree, build_tree, distance_matrix, tree_path_metric
from .whitney import (
    FieldNormReport,
    JetField,
    lipschitz_orlicz_norm,
    wg_feasibility_check,
    wg_lambda_star,
    wg_sup_part,
    wg_worst_pair,
)

__all__ = [name for name in dir() if not name.startswith("_")]
