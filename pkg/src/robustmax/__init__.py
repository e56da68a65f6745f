"""Exact worst-case (scaled) submodular maximization under a knapsack.

The library maximizes the minimum of several scaled monotone submodular
objectives by delayed generation of linearized hypograph cuts over an
in-repo branch-and-bound master, with a time-budgeted pipeline for the
variant scaled by each scenario's own optimum.  The bundled application is
outbreak-detection sensor placement on water networks.
"""

from .core import (FacetDiagnostics, SetFunction, SubmodularCut, build_cut,
                   check_submodular, dominates, empty_set_cuts, facet_check)
from .dcg import (DcgConfig, SolveReport, brute_force_robust, min_index,
                  solve_robust, strengthen_generating_set, support)
from .master import MasterResult, MasterState, node_bound
from .ratio import (RatioReport, ScenarioBounds, certify_ratio_optimal,
                    maximize_single, rescale_cuts, solve_ratio_robust)
from .water import (Instance, Network, ParseError, ReductionMatrix, Scenario,
                    expected_reduction_oracle, generate_instance,
                    parse_instance, reduction_matrix, serialize_instance,
                    shortest_times, with_budget)

__all__ = [
    "SetFunction", "SubmodularCut", "FacetDiagnostics", "build_cut",
    "empty_set_cuts", "dominates", "facet_check", "check_submodular",
    "MasterState", "MasterResult", "node_bound",
    "DcgConfig", "SolveReport", "min_index", "strengthen_generating_set",
    "solve_robust", "brute_force_robust", "support",
    "ScenarioBounds", "RatioReport", "maximize_single", "rescale_cuts",
    "solve_ratio_robust", "certify_ratio_optimal",
    "Network", "Scenario", "ReductionMatrix", "Instance", "ParseError",
    "shortest_times", "reduction_matrix", "expected_reduction_oracle",
    "parse_instance", "serialize_instance", "generate_instance", "with_budget",
]

__version__ = "0.1.0"
