"""Optimisation over the Pareto-optimal points of a polytope with linear payoffs."""
from .errors import (
    CapExceeded,
    DimensionError,
    InfeasiblePoint,
    InstanceRejected,
    InvalidMatching,
    MaxParetoError,
    NumericalBreakdown,
    ParseError,
    PreconditionViolated,
    SuiteInvariantError,
    ValidationFailed,
)
from .lp import LpProblem, LpSolution, LpStatus, solve_lexicographic, solve_lp
from .matching import (
    AllocationInstance,
    BipartiteInstance,
    BlockingSet,
    Matching,
    encode_allocation,
    find_blocking_set,
    graph_to_instance,
    is_fpo_matching,
    is_po_matching,
    payoff_vector,
)
from .model import MaxParetoInstance, load_instance, payoff, save_instance
from .numeric import EXACT, FLOAT, NumericMode
from .pareto import (
    SupportCertificate,
    check_certificate,
    detect_aligned_interests,
    dominates,
    find_support_certificate,
    verify_pareto,
)
from .solver import HeuristicConfig, SolveReport, evaluate_weight, make_prop9_instance, solve_exact, solve_heuristic

__version__ = "0.1.0"
