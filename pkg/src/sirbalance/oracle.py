"""Independent ground-truth computations.

Nothing here touches the extended-matrix eigenproblem: the balancing level
is found by bisecting the threshold t of the fixed-point family
p(t) = (I/t - diag(gamma) V)^{-1} diag(gamma) z against polytope
membership, and at K = 2 a dense grid search brutes the definition
directly.  Both serve as oracles for the spectral route.
"""

from __future__ import annotations

import numpy as np

from .balancer import closed_form_power
from .config import DEFAULT, SolverConfig
from .errors import (
    DomainError,
    NoFeasibleT,
    SpectralRadiusViolation,
    UnsupportedDimension,
)
from .model import ConstraintPolytope, NetworkModel, constraint_levels


def _row_sum_bound(model: NetworkModel, poly: ConstraintPolytope) -> float:
    """Max row-sum of the elementwise upper envelope of all B(n).

    The envelope is diag(gamma)(V + z h^T) with h_l = max_n C[n,l]/P_n; its
    max row-sum dominates every Perron root, so 1/bound is a certified
    feasible threshold region.
    """
    h = (poly.C / poly.p_hat[:, None]).max(axis=0)
    envelope = model.gamma_V() + np.outer(model.gamma_z(), h)
    return float(envelope.sum(axis=1).max())


def bisect_maxmin(
    model: NetworkModel,
    poly: ConstraintPolytope,
    tol_t: float | None = None,
    config: SolverConfig = DEFAULT,
) -> tuple[float, np.ndarray]:
    """Largest threshold t with p(t) inside the polytope, by bisection.

    p(t) is componentwise increasing in t (Neumann series with positive
    terms), so feasibility of t is monotone and bisection applies.  Returns
    (t_star, p(t_star)) with the bracket narrowed below ``tol_t``.
    """
    if tol_t is None:
        tol_t = config.tol_t

    def admissible(t: float) -> bool:
        try:
            p = closed_form_power(model, t, config)
        except SpectralRadiusViolation:
            return False
        return float(constraint_levels(poly, p).max()) <= 1.0

    t_lo = 0.5 / _row_sum_bound(model, poly)
    halvings = 0
    while not admissible(t_lo):
        t_lo *= 0.5
        halvings += 1
        if halvings > 200:
            raise NoFeasibleT(
                "no positive threshold admits a valid power vector; the "
                "scenario violates its own invariants"
            )

    t_hi = 2.0 * t_lo
    while admissible(t_hi):
        t_lo = t_hi
        t_hi *= 2.0

    while t_hi - t_lo > tol_t:
        mid = 0.5 * (t_lo + t_hi)
        if admissible(mid):
            t_lo = mid
        else:
            t_hi = mid

    return t_lo, closed_form_power(model, t_lo, config)


def grid_bruteforce(
    model: NetworkModel,
    poly: ConstraintPolytope,
    resolution: int = 2000,
    chunk: int = 256,
) -> tuple[float, np.ndarray]:
    """Best min_k SIR_k/gamma_k over a grid of the 2-link polytope.

    Returns the best grid point; its level never exceeds the true optimum
    and lies within O(1/resolution) of it.
    """
    if model.K != 2 or poly.K != 2:
        raise UnsupportedDimension("grid search is implemented for K = 2 only")
    if resolution < 100:
        raise DomainError("resolution must be at least 100")

    box = poly.bounding_box()
    axis1 = np.linspace(box[0] / resolution, box[0], resolution)
    axis2 = np.linspace(box[1] / resolution, box[1], resolution)

    v12 = model.V[0, 1]
    v21 = model.V[1, 0]
    z = model.z
    gamma = model.gamma

    best_level = -np.inf
    best_p = None
    for start in range(0, resolution, chunk):
        p1 = axis1[start : start + chunk][:, None]
        p2 = axis2[None, :]
        ratio1 = (p1 / (v12 * p2 + z[0])) / gamma[0]
        ratio2 = (p2 / (v21 * p1 + z[1])) / gamma[1]
        level = np.minimum(ratio1, ratio2)
        feasible = np.ones_like(level, dtype=bool)
        for n in range(poly.N):
            lhs = poly.C[n, 0] * p1 + poly.C[n, 1] * p2
            feasible &= lhs <= poly.p_hat[n] * (1.0 + 1e-12)
        level = np.where(feasible, level, -np.inf)
        idx = np.unravel_index(np.argmax(level), level.shape)
        if level[idx] > best_level:
            best_level = float(level[idx])
            best_p = np.array([p1[idx[0], 0], p2[0, idx[1]]])
    return best_level, best_p


def targets_feasible(
    model: NetworkModel,
    poly: ConstraintPolytope,
    gammas,
    config: SolverConfig = DEFAULT,
) -> np.ndarray:
    """Eigen-free feasibility decision for one or many target vectors.

    Targets gamma are feasible iff the minimal power vector meeting them
    with equality, p = (I - diag(gamma) V)^{-1} diag(gamma) z, exists and
    lies in the polytope.  ``gammas`` may be a single vector or a (m, K)
    batch; returns a boolean (array).
    """
    gammas = np.asarray(gammas, dtype=float)
    single = gammas.ndim == 1
    G = gammas[None, :] if single else gammas
    if np.any(G <= 0):
        raise DomainError("targets must be strictly positive")

    out = np.zeros(G.shape[0], dtype=bool)
    # Batch the Neumann iterations: each row evolves under its own
    # diag(gamma) V, which is a row-scaled matvec against the shared V.
    b = G * model.z
    term = b.copy()
    total = b.copy()
    alive = np.ones(G.shape[0], dtype=bool)
    huge = 1e12 * max(float(np.abs(b).max()), 1.0)
    for _ in range(config.neumann_max_terms):
        term = G * (term @ model.V.T)
        total += term
        t_norm = np.abs(term).max(axis=1)
        done = t_norm <= config.neumann_tol * np.abs(total).max(axis=1)
        diverged = t_norm > huge
        newly = alive & done
        if np.any(newly):
            levels = (total[newly] @ poly.C.T) / poly.p_hat
            out[newly] = (levels.max(axis=1) <= 1.0) & np.all(
                total[newly] > 0, axis=1
            )
        alive &= ~done & ~diverged
        term[~alive] = 0.0  # freeze finished rows; keeps inf/nan out of the batch
        if not np.any(alive):
            break
    # Rows still alive or diverged are infeasible: the minimal power either
    # blows up (spectral radius >= 1) or fails to settle in budget.
    return bool(out[0]) if single else out
