"""Euclidean-type projections used by the gradient routes.

Two building blocks: the exact sort-based projection onto the probability
simplex (optionally with a positive floor), and Dykstra's alternating
projections onto the power polytope {p : C p <= p_hat, p >= lower}.

The polytope projection accepts a diagonal metric: ``metric_diag=d``
projects in the norm sum((y_i - x_i)^2 / d_i).  The log-domain ascent steps
are gradient steps preconditioned by diag(p)^2, and projecting in the
matching metric keeps the fixed points of the projected iteration at the
KKT points of the original problem; a plain Euclidean projection would
drift tangentially along shared (sum) constraints.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError


def project_simplex(v, floor: float = 0.0) -> np.ndarray:
    """Euclidean projection onto {w : w >= floor, sum(w) = 1}.

    Sort-based exact algorithm; O(K log K).  ``floor`` must satisfy
    K * floor < 1.
    """
    v = np.asarray(v, dtype=float)
    K = v.size
    if K * floor >= 1.0:
        raise DomainError(f"floor {floor} leaves no simplex mass for K={K}")
    # Shift so the floored problem becomes a plain simplex projection of
    # total mass 1 - K*floor.
    u = v - floor
    mass = 1.0 - K * floor
    s = np.sort(u)[::-1]
    cumulative = np.cumsum(s)
    j = np.arange(1, K + 1)
    tau_candidates = (cumulative - mass) / j
    # Largest j with s_j > tau_j keeps exactly the positive support.
    support = np.flatnonzero(s > tau_candidates)
    rho = support[-1]
    tau = tau_candidates[rho]
    return np.maximum(u - tau, 0.0) + floor


def _project_halfspace(x, c, bound, d):
    """Projection of x onto {y : c^T y <= bound} in the metric diag(1/d)."""
    excess = float(c @ x) - bound
    if excess <= 0.0:
        return x
    dc = d * c
    return x - (excess / float(c @ dc)) * dc


def project_polytope(
    x,
    C,
    p_hat,
    lower=0.0,
    metric_diag=None,
    tol: float = 1e-13,
    max_cycles: int = 1000,
) -> np.ndarray:
    """Projection of x onto {p : C p <= p_hat, p >= lower} via Dykstra.

    ``metric_diag`` (positive vector d) selects the norm
    sum((y_i - x_i)^2 / d_i); None means Euclidean.  Halfspace and box
    projections are closed-form, so each Dykstra cycle is O(N K).
    """
    x = np.asarray(x, dtype=float)
    C = np.asarray(C, dtype=float)
    p_hat = np.asarray(p_hat, dtype=float)
    d = np.ones_like(x) if metric_diag is None else np.asarray(metric_diag, dtype=float)
    lower_vec = np.broadcast_to(np.asarray(lower, dtype=float), x.shape)

    scale = max(float(np.abs(x).max()), float(p_hat.max()), 1.0)

    # Fast paths: already feasible, or exactly one violated halfspace (its
    # single projection clamped to the box is the exact answer when the
    # clamp does not re-violate it).
    y0 = np.maximum(x, lower_vec)
    levels = C @ y0 - p_hat
    violated = np.flatnonzero(levels > tol * scale)
    if violated.size == 0 and np.all(x >= lower_vec - tol * scale):
        return y0
    if violated.size == 1:
        n = int(violated[0])
        y = _project_halfspace(x, C[n], float(p_hat[n]), d)
        y = np.maximum(y, lower_vec)
        if np.all(C @ y - p_hat <= tol * scale):
            return y

    N = C.shape[0]
    y = x.copy()
    increments = np.zeros((N + 1, x.size))
    for _ in range(max_cycles):
        change = 0.0
        for n in range(N + 1):
            z = y + increments[n]
            if n < N:
                y_new = _project_halfspace(z, C[n], float(p_hat[n]), d)
            else:
                y_new = np.maximum(z, lower_vec)
            increments[n] = z - y_new
            change = max(change, float(np.abs(y_new - y).max()))
            y = y_new
        if change <= tol * scale:
            break
    # Feasibility polish: the box is the last projected set so y >= lower
    # already; pull radially inside the halfspaces if a residual remains.
    over = float((C @ y / p_hat).max())
    if over > 1.0:
        y = y / over
    return y
