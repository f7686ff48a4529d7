"""Max-min SIR balancing through the extended-matrix eigenproblem.

For each power constraint n the gain matrix is augmented with the noise
vector and the constraint row,

    B(n) = diag(gamma) V + (1/P_n) diag(gamma) z c_n^T,

so that the constrained balancing optimum becomes the Perron eigenproblem
of the B(n) with the largest root.  The (K+1)-dimensional companion A(n)
carries the same root and embeds the power vector with a trailing 1.
Constraint indices reported to callers (n0, N0) are 1-based, matching the
constraint order of the scenario.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral
from .config import DEFAULT, SolverConfig
from .errors import (
    DimensionError,
    DomainError,
    InternalInvariantViolation,
    NotIrreducible,
    SpectralRadiusViolation,
)
from .model import ConstraintPolytope, NetworkModel, constraint_levels, sir


def assemble_B(model: NetworkModel, poly: ConstraintPolytope) -> np.ndarray:
    """Stack of the N extended K x K matrices B(n), no eigenwork."""
    GV = model.gamma_V()
    Gz = model.gamma_z()
    # (N, K, K): outer product of Gz with each constraint row, scaled by 1/P_n.
    rank_one = Gz[None, :, None] * (poly.C / poly.p_hat[:, None])[:, None, :]
    return GV[None, :, :] + rank_one


def assemble_A(model: NetworkModel, poly: ConstraintPolytope) -> np.ndarray:
    """Stack of the N extended (K+1) x (K+1) matrices A(n)."""
    K = model.K
    GV = model.gamma_V()
    Gz = model.gamma_z()
    A = np.zeros((poly.N, K + 1, K + 1))
    for n in range(poly.N):
        scale = poly.C[n] / poly.p_hat[n]
        A[n, :K, :K] = GV
        A[n, :K, K] = Gz
        A[n, K, :K] = scale @ GV
        A[n, K, K] = scale @ Gz
    return A


@dataclass(frozen=True)
class ExtendedMatrices:
    """The per-constraint matrices with their Perron data.

    ``triples[n]`` holds rho, right vector x and left vector y of B[n]
    (normalized ||x||_1 = 1, y^T x = 1).
    """

    B: np.ndarray
    A: np.ndarray
    rho_B: np.ndarray
    triples: tuple[spectral.PerronTriple, ...]


def build_extended(
    model: NetworkModel,
    poly: ConstraintPolytope,
    config: SolverConfig = DEFAULT,
) -> ExtendedMatrices:
    """Assemble B(n), A(n) and solve every B(n) Perron problem.

    Requires each B(n) to be irreducible (weaker than requiring V itself
    irreducible: a sum constraint makes B positive even for reducible V).
    """
    if model.K != poly.K:
        raise DimensionError(
            f"model has K={model.K} links but polytope has K={poly.K}"
        )
    B = assemble_B(model, poly)
    A = assemble_A(model, poly)
    for n in range(poly.N):
        if not spectral.is_irreducible(B[n]):
            raise NotIrreducible(
                f"extended matrix B({n + 1}) is reducible; the max-min "
                "solution may be non-unique and is not computed",
                index=n + 1,
            )
    triples = tuple(spectral.perron_stack(B, config.tol, config.max_iter))
    rho_B = np.array([t.rho for t in triples])
    return ExtendedMatrices(B=B, A=A, rho_B=rho_B, triples=triples)


@dataclass(frozen=True)
class SolveDiagnostics:
    eigen_residual: float
    a_route_residual: float
    balance_spread: float
    perron_iterations: int


@dataclass(frozen=True)
class MaxMinSolution:
    """Optimal powers with the balance level and active-constraint set.

    ``beta`` is the common ratio gamma_k / SIR_k(p_bar); the achieved
    max-min value is ``level`` = 1/beta.  ``n0`` is the selected (smallest)
    active-constraint number and ``N0`` the full active set, 1-based.
    """

    p_bar: np.ndarray
    beta: float
    level: float
    n0: int
    N0: tuple[int, ...]
    sir: np.ndarray
    rho_B: np.ndarray
    diagnostics: SolveDiagnostics


def solve_maxmin(
    model: NetworkModel,
    poly: ConstraintPolytope,
    config: SolverConfig = DEFAULT,
    extended: ExtendedMatrices | None = None,
) -> MaxMinSolution:
    """Compute the unique max-min SIR-balanced power vector.

    Selects n0 = argmax_n rho(B(n)) (smallest index on ties), scales the
    Perron vector of B(n0) so that constraint n0 is met with equality, and
    cross-checks the companion route A(n0) (p_bar, 1) = beta (p_bar, 1).
    """
    ext = extended if extended is not None else build_extended(model, poly, config)
    rho = ext.rho_B
    beta = float(rho.max())
    # Ties within the active tolerance resolve to the smallest index so the
    # output is deterministic; the full tied set is reported through N0.
    argmax_set = np.flatnonzero(rho >= beta * (1.0 - config.tol_active))
    n0 = int(argmax_set[0])

    x = ext.triples[n0].x
    scale = poly.p_hat[n0] / float(poly.C[n0] @ x)
    p_bar = x * scale
    if not np.all(p_bar > 0):
        raise InternalInvariantViolation(
            "Perron vector of an irreducible matrix must be positive"
        )

    levels = constraint_levels(poly, p_bar)
    active = np.flatnonzero(levels >= 1.0 - config.tol_active)
    if set(active.tolist()) != set(argmax_set.tolist()):
        raise InternalInvariantViolation(
            f"active constraints {sorted(active + 1)} disagree with the "
            f"Perron-root argmax set {sorted(argmax_set + 1)}"
        )
    if np.any(levels > 1.0 + config.tol_active):
        raise InternalInvariantViolation(
            "scaled eigenvector violates a power constraint"
        )

    s = sir(model, p_bar)
    ratios = model.gamma / s
    balance_spread = float(np.abs(ratios - beta).max())
    if balance_spread > 1e-6 * beta:
        raise InternalInvariantViolation(
            f"SIR ratios not balanced: spread {balance_spread:.3e} at beta={beta}"
        )

    p_ext = np.append(p_bar, 1.0)
    a_resid = float(np.abs(ext.A[n0] @ p_ext - beta * p_ext).max())

    diag = SolveDiagnostics(
        eigen_residual=max(t.residual for t in ext.triples),
        a_route_residual=a_resid,
        balance_spread=balance_spread,
        perron_iterations=max(t.iterations for t in ext.triples),
    )
    return MaxMinSolution(
        p_bar=p_bar,
        beta=beta,
        level=1.0 / beta,
        n0=n0 + 1,
        N0=tuple(int(i) + 1 for i in active),
        sir=s,
        rho_B=rho.copy(),
        diagnostics=diag,
    )


def closed_form_power(
    model: NetworkModel,
    t: float,
    config: SolverConfig = DEFAULT,
) -> np.ndarray:
    """Balanced power vector p(t) = (I/t - diag(gamma) V)^{-1} diag(gamma) z.

    Exists iff t * rho(diag(gamma) V) < 1.  Evaluated as the Neumann series
    t * sum_j (t diag(gamma) V)^j diag(gamma) z, which keeps the existence
    condition operational: a diverging series raises SpectralRadiusViolation.
    """
    if t <= 0:
        raise DomainError("t must be positive")
    GV = model.gamma_V()
    if spectral.is_irreducible(GV):
        rho = spectral.spectral_radius(GV, config.tol, config.max_iter)
        if t * rho >= 1.0:
            raise SpectralRadiusViolation(
                f"t * rho(gamma V) = {t * rho:.6g} >= 1: no balanced power "
                "vector exists at this threshold"
            )
    return spectral.neumann_apply(
        t * GV, t * model.gamma_z(), config.neumann_tol, config.neumann_max_terms
    )


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    rho_max: float
    witness: np.ndarray | None


def feasible(
    model: NetworkModel,
    poly: ConstraintPolytope,
    gamma,
    config: SolverConfig = DEFAULT,
) -> FeasibilityResult:
    """Decide whether SIR targets ``gamma`` are achievable inside the polytope.

    The targets are feasible iff max_n rho(B(n)) <= 1 once gamma is
    substituted into the extended matrices.  When feasible, the returned
    witness is the max-min balanced vector, which meets every target.
    """
    candidate = model.with_gamma(gamma)
    ext = build_extended(candidate, poly, config)
    rho_max = float(ext.rho_B.max())
    if rho_max <= 1.0:
        sol = solve_maxmin(candidate, poly, config, extended=ext)
        return FeasibilityResult(feasible=True, rho_max=rho_max, witness=sol.p_bar)
    return FeasibilityResult(feasible=False, rho_max=rho_max, witness=None)
