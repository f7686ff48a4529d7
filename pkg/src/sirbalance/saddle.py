"""Saddle-point route: the objective G, its certified lower bound, the
optimal-weight set, and the simultaneous primal-dual iteration.

G(w, p) = sum_k w_k psi(gamma_k / SIR_k(p)) with psi(x) = -phi(1/x) equals
-F(p, w), so minimizing G over the power polytope is the utility
maximization, while maximizing over the weight simplex searches for the
supporting weights.  The saddle value is psi of the dominant extended-matrix
root, attained at the max-min power vector paired with any convex
combination of the per-active-constraint generators y(n) * x(n).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import spectral
from .balancer import assemble_B, build_extended, solve_maxmin
from .config import DEFAULT, SolverConfig
from .errors import DomainError, InternalInvariantViolation, NoConvergence
from .model import ConstraintPolytope, NetworkModel, UtilitySpec, constraint_levels
from .projections import project_polytope, project_simplex
from .utility_opt import WeightVector, _grad_log_power_raw


def eval_G(
    model: NetworkModel, utility: UtilitySpec, w: WeightVector, p
) -> float:
    """G(w, p) = sum_k w_k psi(gamma_k / SIR_k(p)).

    By psi's definition this equals -F(p, w); the identity is asserted on
    every call as a consistency check of the two evaluators.
    """
    p = np.asarray(p, dtype=float)
    if not np.all(p > 0):
        raise DomainError("p must be strictly positive")
    interference = model.V @ p + model.z
    inv_ratios = model.gamma * interference / p
    value = float(w.w @ utility.psi(inv_ratios))
    f_value = float(w.w @ utility.phi(1.0 / inv_ratios))
    if abs(value + f_value) > 1e-12 * max(1.0, abs(value)):
        raise InternalInvariantViolation(
            f"psi/phi mismatch: G={value} but -F={-f_value}"
        )
    return value


def theorem4_gap(
    model: NetworkModel,
    poly: ConstraintPolytope,
    utility: UtilitySpec,
    n: int,
    p,
    config: SolverConfig = DEFAULT,
) -> float:
    """Slack of the Perron-root lower bound at constraint n (1-based).

    With w = y * x (y^T x = 1) from the eigenpair of B(n), the value
    sum_k w_k psi((B(n) p)_k / p_k) - psi(rho(B(n))) is nonnegative for
    every positive p and vanishes exactly on the ray of the Perron vector.
    """
    if not 1 <= n <= poly.N:
        raise DomainError(f"constraint number must be in 1..{poly.N}, got {n}")
    p = np.asarray(p, dtype=float)
    if not np.all(p > 0):
        raise DomainError("p must be strictly positive")
    B = assemble_B(model, poly)[n - 1]
    triple = spectral.perron(B, config.tol, config.max_iter)
    w = triple.y * triple.x
    ratios = (B @ p) / p
    return float(w @ utility.psi(ratios)) - float(utility.psi(triple.rho))


@dataclass(frozen=True)
class OptimalWeightSet:
    """Generators of the saddle weight set: w(n) = y(n) * x(n), n active.

    The full set is the convex hull of the generators; ``hull_distance``
    measures Euclidean distance to it.
    """

    generators: tuple[WeightVector, ...]
    constraints: tuple[int, ...]  # 1-based constraint numbers

    def hull_distance(self, w) -> float:
        w = np.asarray(w, dtype=float)
        G = np.stack([gen.w for gen in self.generators], axis=1)
        m = G.shape[1]
        best = np.inf
        # Active-set enumeration: the projection onto the hull has some
        # support S; solve the equality-constrained least squares on each
        # candidate support and keep the best feasible one.  m is tiny.
        for mask in range(1, 2**m):
            idx = [j for j in range(m) if mask >> j & 1]
            Gs = G[:, idx]
            k = len(idx)
            kkt = np.zeros((k + 1, k + 1))
            kkt[:k, :k] = 2.0 * (Gs.T @ Gs)
            kkt[:k, k] = 1.0
            kkt[k, :k] = 1.0
            rhs = np.append(2.0 * (Gs.T @ w), 1.0)
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                continue
            c = sol[:k]
            if np.any(c < -1e-12):
                continue
            best = min(best, float(np.linalg.norm(Gs @ c - w)))
        return best


def optimal_weight_set(
    model: NetworkModel,
    poly: ConstraintPolytope,
    config: SolverConfig = DEFAULT,
) -> OptimalWeightSet:
    """Saddle weight generators for every active constraint."""
    ext = build_extended(model, poly, config)
    sol = solve_maxmin(model, poly, config, extended=ext)
    gens = []
    for n in sol.N0:
        t = ext.triples[n - 1]
        w = t.y * t.x  # y^T x = 1 puts this on the simplex already
        gens.append(WeightVector(w / w.sum()))
    return OptimalWeightSet(generators=tuple(gens), constraints=sol.N0)


@dataclass(frozen=True)
class SaddleState:
    """One primal-dual iterate: weights, log-powers, objective value."""

    w: np.ndarray
    s: np.ndarray
    value: float
    iterate: int


@dataclass(frozen=True)
class SaddleResult:
    w: WeightVector
    p: np.ndarray
    value: float
    iterations: int
    converged: bool
    # rows of (iterate, G_value, primal_residual, dual_residual)
    trace: np.ndarray


def write_trace_csv(trace: np.ndarray, path) -> None:
    """Trace export with the canonical column set, 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iterate", "G_value", "primal_residual", "dual_residual"])
        for row in trace:
            writer.writerow(
                [int(row[0])] + [format(v, ".17g") for v in row[1:]]
            )


def saddle_solve(
    model: NetworkModel,
    poly: ConstraintPolytope,
    utility: UtilitySpec,
    config: SolverConfig = DEFAULT,
    w0=None,
    p0=None,
) -> SaddleResult:
    """Simultaneous projected-gradient saddle iteration on G(w, p).

    Each step descends in s = log p (metric-weighted Dykstra projection
    onto the polytope, floored at p_floor) and ascends in w (exact simplex
    projection with floor), both with the diminishing step alpha0/sqrt(t+1).
    With ``config.use_reference`` the stopping test compares against the
    independently computed eigen-route power vector; otherwise it requires
    stationarity of both projected gradients plus a small Perron bound gap
    at the currently-binding constraint.
    """
    K = model.K
    C, p_hat = poly.C, poly.p_hat
    p_floor = 1e-12 * float(p_hat.min())

    B = assemble_B(model, poly)
    reference = None
    weight_set = None
    triples = None
    if config.use_reference:
        ext = build_extended(model, poly, config)
        sol = solve_maxmin(model, poly, config, extended=ext)
        reference = sol.p_bar
        gens = []
        for n in sol.N0:
            tri = ext.triples[n - 1]
            g = tri.y * tri.x
            gens.append(WeightVector(g / g.sum()))
        weight_set = OptimalWeightSet(generators=tuple(gens), constraints=sol.N0)
    else:
        # Perron triples of the B(n) feed the eigen-free stopping bound.
        triples = spectral.perron_stack(B, config.tol, config.max_iter)

    p = (
        np.asarray(p0, dtype=float)
        if p0 is not None
        else np.full(K, 0.5 / float((C @ np.ones(K) / p_hat).max()))
    )
    w = (
        np.asarray(w0, dtype=float)
        if w0 is not None
        else np.full(K, 1.0 / K)
    )

    trace = []
    converged = False
    t = 0
    for t in range(config.max_iter_saddle):
        alpha = config.alpha0 / np.sqrt(t + 1.0)

        interference = model.V @ p + model.z
        inv_ratios = model.gamma * interference / p
        psi_vals = np.asarray(utility.psi(inv_ratios), dtype=float)
        g_value = float(w @ psi_vals)

        # Simultaneous steps computed from the same (w, p).
        g_s = _grad_log_power_raw(model, utility, w, p)  # = -dG/ds
        p_new = project_polytope(
            p + alpha * p * g_s, C, p_hat, lower=p_floor, metric_diag=p * p
        )
        p_new = np.maximum(p_new, p_floor)
        w_new = project_simplex(w + alpha * psi_vals, floor=config.w_floor)

        dual_res = float(np.abs(w_new - w).max()) / alpha
        primal_map = float(np.abs(np.log(p_new / p)).max()) / alpha
        if reference is not None:
            primal_res = float(
                np.abs(p - reference).max() / np.abs(reference).max()
            )
        else:
            primal_res = primal_map
        trace.append((t, g_value, primal_res, dual_res))

        if reference is not None and primal_res < config.primal_tol:
            # The primal residual crosses the tolerance transiently while
            # the dual still spirals, so certify the dual as well.
            if weight_set.hull_distance(w) < config.dual_tol:
                converged = True
                break
        if reference is None and primal_map < config.grad_tol and dual_res < config.grad_tol:
            n0_est = int(np.argmax(constraint_levels(poly, p)))
            tri = triples[n0_est]
            w_gen = tri.y * tri.x
            bound_gap = float(w_gen @ utility.psi((B[n0_est] @ p) / p)) - float(
                utility.psi(tri.rho)
            )
            if bound_gap < config.primal_tol:
                converged = True
                break

        p, w = p_new, w_new

    trace_arr = np.array(trace, dtype=float)
    result = SaddleResult(
        w=WeightVector(w),
        p=p,
        value=float(w @ utility.psi(model.gamma * (model.V @ p + model.z) / p)),
        iterations=t + 1,
        converged=converged,
        trace=trace_arr,
    )
    if not converged:
        raise NoConvergence(
            f"saddle iteration did not converge in {config.max_iter_saddle} steps",
            payload=result,
        )
    return result
