"""Max-min SIR-balanced power allocation under polytope power constraints.

Three mutually cross-checking solution routes: the extended-matrix Perron
eigenproblem, weighted utility maximization with synthesized weights, and a
primal-dual saddle-point iteration; plus eigen-free oracles (threshold
bisection and K = 2 grid search) for independent verification.
"""

from .balancer import (
    ExtendedMatrices,
    FeasibilityResult,
    MaxMinSolution,
    build_extended,
    closed_form_power,
    feasible,
    solve_maxmin,
)
from .config import DEFAULT, SolverConfig
from .errors import (
    DimensionError,
    DomainError,
    InternalInvariantViolation,
    InvalidChannel,
    InvalidScenario,
    NoConvergence,
    NoFeasibleT,
    NotIrreducible,
    NotOnBoundary,
    SirBalanceError,
    SpectralRadiusViolation,
    UnsupportedDimension,
)
from .model import (
    ConstraintPolytope,
    NetworkModel,
    RawChannel,
    UtilitySpec,
    constraint_levels,
    normalize_channel,
    sir,
)
from .oracle import bisect_maxmin, grid_bruteforce, targets_feasible
from .saddle import (
    OptimalWeightSet,
    SaddleResult,
    eval_G,
    optimal_weight_set,
    saddle_solve,
    theorem4_gap,
    write_trace_csv,
)
from .spectral import PerronTriple, is_irreducible, neumann_apply, perron, perron_stack
from .utility_opt import (
    QosPoint,
    WeightVector,
    eval_F,
    grad_log_power,
    lambda_all,
    lambda_n,
    maximize_F,
    maxmin_weights,
    power_of_qos,
    qos_of_power,
    weights_for_boundary,
)

__version__ = "0.1.0"
