"""Solver configuration record with the package-wide default tolerances."""

from dataclasses import dataclass


@dataclass(frozen=True)
class SolverConfig:
    """Tunable tolerances and iteration budgets for every solver route.

    The defaults are chosen so that the eigenproblem route reproduces
    closed-form desk-scale instances to 1e-8 and the iterative routes meet
    their documented agreement tolerances.
    """

    # Perron eigenpair computation (power iteration).
    tol: float = 1e-10
    max_iter: int = 100_000

    # Active-constraint detection: g_n(p) >= 1 - tol_active.
    tol_active: float = 1e-7

    # Neumann series truncation: stop when the new term falls below
    # neumann_tol times the partial sum (max-norm), and divergence guard.
    neumann_tol: float = 1e-14
    neumann_max_terms: int = 200_000

    # Utility maximization (projected gradient ascent in log-power space).
    grad_tol: float = 1e-9
    max_iter_opt: int = 100_000
    armijo: float = 1e-4
    backtrack: float = 0.5

    # Saddle-point primal-dual iteration.
    alpha0: float = 0.5
    w_floor: float = 1e-9
    primal_tol: float = 1e-4
    dual_tol: float = 1e-3
    max_iter_saddle: int = 200_000
    # Certify convergence against the eigen-route solution; switch off to
    # rely on stationarity plus the eigen-free upper-bound gap only.
    use_reference: bool = True

    # Bisection oracle bracket width.
    tol_t: float = 1e-10


DEFAULT = SolverConfig()
