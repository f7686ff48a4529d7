"""Perron-root machinery for nonnegative matrices.

Only the dominant eigenpair of an irreducible nonnegative matrix is ever
needed, so the solver is a power iteration rather than a general
eigensolver: positivity of the iterates is preserved by construction and
the Collatz-Wielandt ratios min_k (Mx)_k/x_k <= rho <= max_k (Mx)_k/x_k
give a certified enclosure of the root to use as the stopping test.

Imprimitive (periodic) matrices stall a plain power iteration (their
subdominant eigenvalues share the dominant modulus), so the iteration runs
on M + eps*I with eps = half the max row-sum; the shift moves every
eigenvalue by exactly eps and leaves eigenvectors untouched, and at this
size it separates the dominant modulus decisively for periodic spectra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    InternalInvariantViolation,
    NoConvergence,
    NotIrreducible,
    SpectralRadiusViolation,
)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000

# Successive-iterate stall bound; tightens the eigenvector beyond what the
# ratio enclosure alone guarantees when the spectral gap is small.
_VEC_TOL_FACTOR = 1e-2

# Diagonal shift as a fraction of the max row-sum.  A shift of this order
# (not a tol-sized one) is required to break the eigenvalue-modulus tie of
# periodic matrices within a realistic iteration budget.
_SHIFT_FACTOR = 0.5


@dataclass(frozen=True)
class PerronTriple:
    """Spectral radius with right/left Perron vectors.

    Normalization: ||x||_1 = 1 and y^T x = 1.  ``residual`` is the max-norm
    of M x - rho x for the unshifted matrix.
    """

    rho: float
    x: np.ndarray
    y: np.ndarray
    residual: float
    iterations: int


def is_irreducible(M) -> bool:
    """True iff the digraph with an edge (i -> j) whenever M[i,j] > 0 is
    strongly connected.

    Tarjan's strongly-connected-components pass, iterative so deep graphs
    cannot hit the recursion limit; linear in the number of positive entries.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"matrix must be square, got shape {M.shape}")
    if np.any(M < 0):
        raise DomainError("matrix must be nonnegative")
    n = M.shape[0]
    if n == 1:
        return bool(M[0, 0] > 0)
    adj = [np.flatnonzero(M[i] > 0) for i in range(n)]

    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    counter = 0
    n_components = 0

    for root in range(n):
        if index[root] != -1:
            continue
        # (node, iterator position) pairs emulate the recursion.
        work = [(root, 0)]
        while work:
            v, pos = work.pop()
            if pos == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            neighbors = adj[v]
            while pos < len(neighbors):
                u = int(neighbors[pos])
                pos += 1
                if index[u] == -1:
                    work.append((v, pos))
                    work.append((u, 0))
                    advanced = True
                    break
                if on_stack[u]:
                    low[v] = min(low[v], index[u])
            if advanced:
                continue
            if low[v] == index[v]:
                n_components += 1
                if n_components > 1:
                    return False
                while True:
                    u = stack.pop()
                    on_stack[u] = False
                    if u == v:
                        break
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return n_components == 1


def _power_iterate(Ms: np.ndarray, tol: float, max_iter: int):
    """Shared core: power iteration on a stack of shifted matrices.

    Ms has shape (m, n, n); every matrix must map positive vectors to
    positive vectors (guaranteed after the diagonal shift).  Returns
    (rho_mid, X, gaps, iterations) where rho_mid is the midpoint of the
    final Collatz-Wielandt bracket per matrix.
    """
    m, n, _ = Ms.shape
    X = np.full((m, n), 1.0 / n)
    vec_tol = tol * _VEC_TOL_FACTOR
    rho_mid = np.zeros(m)
    gaps = np.full(m, np.inf)
    it = 0
    for it in range(1, max_iter + 1):
        MX = np.einsum("mij,mj->mi", Ms, X)
        ratios = MX / X
        rmax = ratios.max(axis=1)
        rmin = ratios.min(axis=1)
        rho_mid = 0.5 * (rmax + rmin)
        gaps = rmax - rmin
        X_new = MX / MX.sum(axis=1, keepdims=True)
        delta = np.abs(X_new - X).max(axis=1)
        X = X_new
        if np.all(gaps <= tol * rho_mid) and np.all(delta <= vec_tol):
            return rho_mid, X, gaps, it
    return rho_mid, X, gaps, -it


def perron(M, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> PerronTriple:
    """Dominant eigenpair (rho, x, y) of an irreducible nonnegative matrix.

    Raises NotIrreducible for reducible input and NoConvergence (payload:
    the best iterate) if the enclosure does not close within max_iter.
    """
    triples = perron_stack(np.asarray(M, dtype=float)[None, :, :], tol, max_iter)
    return triples[0]


def perron_stack(Ms, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> list[PerronTriple]:
    """Perron triples for a stack of matrices, iterated simultaneously.

    The m matrices share the iteration loop, which amortizes the Python
    overhead when many small matrices are solved at once (the per-constraint
    extended matrices, feasibility sweeps).
    """
    Ms = np.asarray(Ms, dtype=float)
    if Ms.ndim != 3 or Ms.shape[1] != Ms.shape[2]:
        raise DomainError(f"expected a stack of square matrices, got {Ms.shape}")
    if tol <= 0:
        raise DomainError("tol must be positive")
    m, n, _ = Ms.shape
    for i in range(m):
        if not is_irreducible(Ms[i]):
            raise NotIrreducible(f"matrix {i} of the stack is reducible", index=i)

    row_sum_max = Ms.sum(axis=2).max(axis=1)
    shifts = _SHIFT_FACTOR * row_sum_max
    eye = np.eye(n)
    Ms_shifted = Ms + shifts[:, None, None] * eye

    rho_r, X, gaps_r, it_r = _power_iterate(Ms_shifted, tol, max_iter)
    rho_l, Y, gaps_l, it_l = _power_iterate(
        np.swapaxes(Ms_shifted, 1, 2), tol, max_iter
    )
    exhausted = it_r < 0 or it_l < 0

    triples = []
    for i in range(m):
        x = X[i]
        y = Y[i]
        # Bilinear Rayleigh quotient of the unshifted matrix: quadratically
        # accurate once both one-sided iterations have converged.
        ytx = float(y @ x)
        rho = float(y @ (Ms[i] @ x)) / ytx
        y = y / ytx
        residual = float(np.abs(Ms[i] @ x - rho * x).max())
        iterations = abs(it_r) + abs(it_l)
        triple = PerronTriple(rho=rho, x=x, y=y, residual=residual, iterations=iterations)
        gap = max(gaps_r[i], gaps_l[i])
        if exhausted and gap > tol * max(rho, np.finfo(float).tiny):
            raise NoConvergence(
                f"power iteration did not converge in {max_iter} iterations "
                f"(matrix {i}, bracket width {gap:.3e})",
                payload=triple,
            )
        lo = Ms[i].sum(axis=1).min()
        hi = row_sum_max[i]
        slack = 1e-9 * max(hi, 1.0)
        if not (lo - slack <= rho <= hi + slack):
            raise InternalInvariantViolation(
                f"Perron root {rho} outside row-sum bounds [{lo}, {hi}]"
            )
        triples.append(triple)
    return triples


def spectral_radius(M, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> float:
    """Perron root only (right iteration), for cheap feasibility checks."""
    M = np.asarray(M, dtype=float)
    if not is_irreducible(M):
        raise NotIrreducible("matrix is reducible")
    shift = _SHIFT_FACTOR * M.sum(axis=1).max()
    Ms = (M + shift * np.eye(M.shape[0]))[None, :, :]
    rho_mid, _, gaps, it = _power_iterate(Ms, tol, max_iter)
    if it < 0:
        raise NoConvergence(
            f"spectral radius estimate did not converge (bracket {gaps[0]:.3e})",
            payload=float(rho_mid[0] - shift),
        )
    return float(rho_mid[0] - shift)


def neumann_apply(
    M,
    b,
    tol: float = 1e-14,
    max_terms: int = 200_000,
) -> np.ndarray:
    """Sum of the Neumann series (I - M)^{-1} b = sum_j M^j b for M, b >= 0.

    Supports a stack: M of shape (n, n) with b of shape (..., n); each row of
    b is summed against the same M.  The series is truncated when the newest
    term drops below ``tol`` times the partial sum in max-norm.  Divergence
    (spectral radius >= 1) is detected operationally: terms that fail to
    decay within ``max_terms`` steps, or that overflow the partial sum by a
    huge factor, raise SpectralRadiusViolation.
    """
    M = np.asarray(M, dtype=float)
    b = np.asarray(b, dtype=float)
    term = b.copy()
    total = b.copy()
    MT = M.T
    huge = 1e12 * max(float(np.abs(b).max()), 1.0)
    for _ in range(max_terms):
        term = term @ MT
        total += term
        t_norm = float(np.abs(term).max())
        if t_norm <= tol * float(np.abs(total).max()):
            return total
        if t_norm > huge:
            raise SpectralRadiusViolation(
                "Neumann series diverges: spectral radius of the iteration "
                "matrix is not below 1"
            )
    raise SpectralRadiusViolation(
        f"Neumann series failed to converge within {max_terms} terms; "
        "spectral radius is at or above 1"
    )
