"""Utility-based route: QoS maps, boundary tests, weight synthesis and
weighted-utility maximization.

The QoS of link k at power p is q_k = phi(SIR_k(p)/gamma_k).  The map
between positive feasible powers and the QoS region is a bijection whose
inverse is the fixed point p(q) = (I - G(q) Gamma V)^{-1} G(q) Gamma z with
G(q) = diag(g(q_k)).  A point q lies on the region's boundary iff the
largest extended-matrix root rho(G(q) B(n)) reaches 1, and a supporting
weight vector there is u(q) * y * x built from the derivative of that root.

Maximizing F(p, w) = sum_k w_k phi(SIR_k(p)/gamma_k) runs as gradient
ascent in s = log p, where the objective is concave; steps are
preconditioned by diag(p)^2, so the polytope projection uses the matching
diagonal metric (see projections).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral
from .balancer import assemble_B, build_extended, solve_maxmin
from .config import DEFAULT, SolverConfig
from .errors import (
    DomainError,
    NoConvergence,
    NotOnBoundary,
    SpectralRadiusViolation,
)
from .model import ConstraintPolytope, NetworkModel, UtilitySpec, constraint_levels, sir
from .projections import project_polytope

BOUNDARY_TOL = 1e-6


@dataclass(frozen=True)
class QosPoint:
    """QoS vector q with q_k = phi(SIR_k(p)/gamma_k) for some power p."""

    q: np.ndarray
    utility: UtilitySpec

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    def G_diag(self) -> np.ndarray:
        """The diagonal of G(q) = diag(g(q_k))."""
        return np.asarray(self.utility.g(self.q), dtype=float)


@dataclass(frozen=True)
class WeightVector:
    """Strictly positive weights on the open probability simplex."""

    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        if not np.all(w > 0):
            raise DomainError("weights must be strictly positive")
        total = w.sum()
        if abs(total - 1.0) > 1e-8:
            raise DomainError(f"weights must sum to 1, got {total}")
        w = w / total
        w.setflags(write=False)
        object.__setattr__(self, "w", w)


def qos_of_power(model: NetworkModel, utility: UtilitySpec, p) -> QosPoint:
    """QoS point of a positive power vector."""
    ratios = sir(model, p) / model.gamma
    return QosPoint(q=utility.phi(ratios), utility=utility)


def power_of_qos(
    model: NetworkModel,
    utility: UtilitySpec,
    qos: QosPoint,
    config: SolverConfig = DEFAULT,
) -> np.ndarray:
    """Inverse QoS map: the unique power vector achieving q exactly.

    Exists iff rho(G(q) Gamma V) < 1; evaluated by the Neumann series,
    which raises SpectralRadiusViolation when q lies outside the region.
    """
    gdiag = qos.G_diag()
    if not np.all(gdiag > 0):
        raise DomainError("g(q) must be positive; q outside the utility's range")
    M = gdiag[:, None] * model.gamma_V()
    if spectral.is_irreducible(M):
        rho = spectral.spectral_radius(M, config.tol, config.max_iter)
        if rho >= 1.0:
            raise SpectralRadiusViolation(
                f"rho(G(q) Gamma V) = {rho:.6g} >= 1: q is not an achievable QoS point"
            )
    return spectral.neumann_apply(
        M, gdiag * model.gamma_z(), config.neumann_tol, config.neumann_max_terms
    )


def lambda_all(
    model: NetworkModel,
    poly: ConstraintPolytope,
    utility: UtilitySpec,
    qos: QosPoint,
    config: SolverConfig = DEFAULT,
) -> np.ndarray:
    """rho(G(q) B(n)) for every constraint n; boundary iff the max is 1."""
    gdiag = qos.G_diag()
    B = assemble_B(model, poly)
    scaled = gdiag[None, :, None] * B
    triples = spectral.perron_stack(scaled, config.tol, config.max_iter)
    return np.array([t.rho for t in triples])


def lambda_n(
    model: NetworkModel,
    poly: ConstraintPolytope,
    utility: UtilitySpec,
    qos: QosPoint,
    n: int,
    config: SolverConfig = DEFAULT,
) -> float:
    """rho(G(q) B(n)) for the 1-based constraint number n."""
    if not 1 <= n <= poly.N:
        raise DomainError(f"constraint number must be in 1..{poly.N}, got {n}")
    gdiag = qos.G_diag()
    B = assemble_B(model, poly)[n - 1]
    return spectral.perron(gdiag[:, None] * B, config.tol, config.max_iter).rho


def weights_for_boundary(
    model: NetworkModel,
    poly: ConstraintPolytope,
    utility: UtilitySpec,
    qos: QosPoint,
    config: SolverConfig = DEFAULT,
) -> WeightVector:
    """Supporting-hyperplane weights at a boundary QoS point.

    w is proportional to u(q) * y * x with u_k = g'(q_k)/g(q_k) and (y, x)
    the left/right Perron pair of G(q) B(n0) at the maximizing constraint;
    this is the gradient direction of the binding root in q, normalized to
    the simplex.
    """
    gdiag = qos.G_diag()
    B = assemble_B(model, poly)
    scaled = gdiag[None, :, None] * B
    triples = spectral.perron_stack(scaled, config.tol, config.max_iter)
    lam = np.array([t.rho for t in triples])
    lam_max = float(lam.max())
    if abs(lam_max - 1.0) > BOUNDARY_TOL:
        raise NotOnBoundary(
            f"max_n rho(G(q) B(n)) = {lam_max:.8g} is not 1; q does not lie "
            "on the feasibility boundary"
        )
    n0 = int(lam.argmax())
    u = np.asarray(utility.g_prime(qos.q), dtype=float) / gdiag
    w = u * triples[n0].y * triples[n0].x
    return WeightVector(w / w.sum())


def maxmin_weights(
    model: NetworkModel,
    poly: ConstraintPolytope,
    config: SolverConfig = DEFAULT,
) -> WeightVector:
    """Weights that make the utility optimum coincide with the max-min point.

    Utility-independent: w is proportional to y * x of the dominant
    extended matrix B(n0), n0 in the active set.
    """
    ext = build_extended(model, poly, config)
    sol = solve_maxmin(model, poly, config, extended=ext)
    triple = ext.triples[sol.n0 - 1]
    w = triple.y * triple.x
    return WeightVector(w / w.sum())


def eval_F(
    model: NetworkModel, utility: UtilitySpec, w: WeightVector, p
) -> float:
    """Aggregate utility F(p, w) = sum_k w_k phi(SIR_k(p)/gamma_k)."""
    ratios = sir(model, p) / model.gamma
    return float(w.w @ utility.phi(ratios))


def _grad_log_power_raw(model, utility, w_arr, p):
    I = model.V @ p + model.z
    r = p / (model.gamma * I)
    a = w_arr * np.asarray(utility.phi_prime(r), dtype=float) * r
    return a - p * (model.V.T @ (a / I))


def grad_log_power(
    model: NetworkModel, utility: UtilitySpec, w: WeightVector, p
) -> np.ndarray:
    """Gradient of F(exp(s), w) with respect to s = log p.

    dF/ds_l = a_l - p_l * sum_k a_k V[k,l] / I_k with a_k =
    w_k phi'(r_k) r_k, r_k = SIR_k/gamma_k and I the interference.
    """
    return _grad_log_power_raw(model, utility, w.w, np.asarray(p, dtype=float))


def maximize_F(
    model: NetworkModel,
    poly: ConstraintPolytope,
    utility: UtilitySpec,
    w: WeightVector,
    config: SolverConfig = DEFAULT,
) -> np.ndarray:
    """argmax of F(p, w) over the positive part of the power polytope.

    Projected gradient ascent in log-power coordinates with Armijo
    backtracking from step 1.0; the preconditioned step p + alpha p^2 dF/dp
    is projected back in the diag(p)^-2 metric, so stationary points are
    exactly the KKT points.  Terminates when the step-1 projected-gradient
    map falls below config.grad_tol in max-norm.
    """
    C, p_hat = poly.C, poly.p_hat
    p_floor = 1e-12 * float(p_hat.min())
    # Interior start: half the budget of the tightest constraint on 1.
    p = np.full(model.K, 0.5 / float((C @ np.ones(model.K) / p_hat).max()))

    fval = eval_F(model, utility, w, p)
    for _ in range(config.max_iter_opt):
        g = grad_log_power(model, utility, w, p)
        metric = p * p

        def project(step):
            return project_polytope(
                p + step * p * g, C, p_hat, lower=p_floor, metric_diag=metric
            )

        p_unit = project(1.0)
        gap = np.abs(np.log(p_unit) - np.log(p)).max()
        if gap < config.grad_tol:
            return p

        alpha = 1.0
        p_trial = p_unit
        accepted = False
        # F can only be measured to roundoff; without this allowance the
        # line search rejects genuine steps once the true gain drops below
        # the noise floor and the iteration freezes short of the optimum.
        noise = 1e-14 * (1.0 + abs(fval))
        while alpha > 1e-14:
            delta = p_trial - p
            # Linear ascent model in p: <dF/dp, delta> = <g/p, delta>.
            model_gain = float((g / p) @ delta)
            f_trial = eval_F(model, utility, w, p_trial)
            if f_trial >= fval + config.armijo * model_gain - noise:
                p, fval = p_trial, f_trial
                accepted = True
                break
            alpha *= config.backtrack
            p_trial = project(alpha)
        if not accepted:
            # No ascent at machine-level steps: reached numerical stationarity.
            if gap < 1e3 * config.grad_tol:
                return p
            raise NoConvergence(
                f"line search stalled with projected-gradient map {gap:.3e}",
                payload=p,
            )
    raise NoConvergence(
        f"utility maximization did not reach grad_tol={config.grad_tol} in "
        f"{config.max_iter_opt} iterations",
        payload=p,
    )
