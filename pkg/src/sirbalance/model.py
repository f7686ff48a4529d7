"""Network data model: gains, noise, SIR targets, power polytope, utilities.

All quantities are normalized as in the interference model: the gain matrix
``V`` has zero diagonal and holds cross-gains divided by the direct gain,
and the noise vector ``z`` holds noise variance divided by the direct gain.
``normalize_channel`` produces this form from raw attenuation measurements.

Every type is immutable after construction (arrays are frozen), so instances
can be shared freely across threads; all operations are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError, InvalidChannel


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class NetworkModel:
    """Interference environment: cross-gains V, noise z, SIR targets gamma.

    Invariants (checked eagerly): V is square and nonnegative with zero
    diagonal, z > 0, gamma > 0, and the link count K is at least 2.
    """

    V: np.ndarray
    z: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        V = _freeze(self.V)
        z = _freeze(self.z)
        gamma = _freeze(self.gamma)
        if V.ndim != 2 or V.shape[0] != V.shape[1]:
            raise DimensionError(f"V must be square, got shape {V.shape}")
        K = V.shape[0]
        if K < 2:
            raise DomainError(f"need at least 2 links, got K={K}")
        if z.shape != (K,) or gamma.shape != (K,):
            raise DimensionError(
                f"z and gamma must have length {K}, got {z.shape} and {gamma.shape}"
            )
        if np.any(V < 0):
            raise DomainError("V must be nonnegative")
        if np.any(np.diag(V) != 0):
            raise DomainError("V must have zero diagonal")
        if not np.all(z > 0):
            raise DomainError("z must be strictly positive")
        if not np.all(gamma > 0):
            raise DomainError("gamma must be strictly positive")
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "gamma", gamma)

    @property
    def K(self) -> int:
        return self.V.shape[0]

    def gamma_V(self) -> np.ndarray:
        """The target-scaled gain matrix diag(gamma) @ V."""
        return self.gamma[:, None] * self.V

    def gamma_z(self) -> np.ndarray:
        """The target-scaled noise vector diag(gamma) @ z."""
        return self.gamma * self.z

    def with_gamma(self, gamma) -> "NetworkModel":
        """Same network with different SIR targets."""
        return NetworkModel(self.V, self.z, gamma)


@dataclass(frozen=True)
class RawChannel:
    """Raw attenuation matrix G (positive diagonal) and noise variances."""

    G: np.ndarray
    sigma2: np.ndarray

    def __post_init__(self):
        G = _freeze(self.G)
        sigma2 = _freeze(self.sigma2)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise DimensionError(f"G must be square, got shape {G.shape}")
        if sigma2.shape != (G.shape[0],):
            raise DimensionError(
                f"sigma2 must have length {G.shape[0]}, got {sigma2.shape}"
            )
        if np.any(G < 0):
            raise InvalidChannel("G must be nonnegative")
        if not np.all(np.diag(G) > 0):
            raise InvalidChannel("G must have a strictly positive diagonal")
        if not np.all(sigma2 > 0):
            raise InvalidChannel("sigma2 must be strictly positive")
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "sigma2", sigma2)


@dataclass(frozen=True)
class ConstraintPolytope:
    """Power constraint set {p >= 0 : C p <= p_hat} with C in {0,1}^(N x K).

    Every column of C must contain at least one 1 so the set is compact.
    """

    C: np.ndarray
    p_hat: np.ndarray

    def __post_init__(self):
        C = _freeze(self.C)
        p_hat = _freeze(self.p_hat)
        if C.ndim != 2:
            raise DimensionError(f"C must be a matrix, got shape {C.shape}")
        N, K = C.shape
        if N < 1:
            raise DomainError("need at least one constraint")
        if p_hat.shape != (N,):
            raise DimensionError(f"p_hat must have length {N}, got {p_hat.shape}")
        if not np.all((C == 0) | (C == 1)):
            raise DomainError("C entries must be 0 or 1")
        if not np.all(C.sum(axis=0) >= 1):
            raise DomainError("every column of C needs at least one 1 (compactness)")
        if not np.all(p_hat > 0):
            raise DomainError("p_hat must be strictly positive")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "p_hat", p_hat)

    @property
    def N(self) -> int:
        return self.C.shape[0]

    @property
    def K(self) -> int:
        return self.C.shape[1]

    def bounding_box(self) -> np.ndarray:
        """Per-coordinate upper bound of the polytope (0/1 rows make it exact)."""
        bounds = np.where(self.C > 0, self.p_hat[:, None], np.inf)
        return bounds.min(axis=0)


@dataclass(frozen=True)
class UtilitySpec:
    """A strictly increasing utility phi with log-convex inverse g.

    Two families are provided: ``log`` with phi(x) = ln x, and ``negpow``
    with phi(x) = -1/x**n for an integer n >= 1.  Evaluators accept scalars
    or numpy arrays.  ``psi(x) = -phi(1/x)`` is the increasing companion
    used by the saddle-point objective.
    """

    kind: str
    n: int = 0

    def __post_init__(self):
        if self.kind not in ("log", "negpow"):
            raise DomainError(f"unknown utility kind {self.kind!r}")
        if self.kind == "negpow" and self.n < 1:
            raise DomainError("negpow requires an integer exponent n >= 1")

    @classmethod
    def log(cls) -> "UtilitySpec":
        return cls("log")

    @classmethod
    def negpow(cls, n: int) -> "UtilitySpec":
        return cls("negpow", int(n))

    # phi : (0, inf) -> Q, strictly increasing, C^1
    def phi(self, x):
        if self.kind == "log":
            return np.log(x)
        return -np.power(x, -float(self.n))

    def phi_prime(self, x):
        if self.kind == "log":
            return 1.0 / np.asarray(x, dtype=float)
        return self.n * np.power(x, -float(self.n + 1))

    # g = phi^{-1}, log-convex on Q (all of R for log, (-inf, 0) for negpow)
    def g(self, x):
        if self.kind == "log":
            return np.exp(x)
        return np.power(-np.asarray(x, dtype=float), -1.0 / self.n)

    def g_prime(self, x):
        if self.kind == "log":
            return np.exp(x)
        return (1.0 / self.n) * np.power(-np.asarray(x, dtype=float), -1.0 / self.n - 1.0)

    def psi(self, x):
        """psi(x) = -phi(1/x); equals ln x for log and x**n for negpow."""
        if self.kind == "log":
            return np.log(x)
        return np.power(x, float(self.n))

    def label(self) -> str:
        return "log" if self.kind == "log" else f"negpow:{self.n}"


def normalize_channel(raw: RawChannel, gamma) -> NetworkModel:
    """Normalize raw attenuations by the direct gains.

    v[k,l] = G[k,l]/G[k,k] for l != k (zero diagonal) and z[k] =
    sigma2[k]/G[k,k].
    """
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (raw.G.shape[0],):
        raise DimensionError(
            f"gamma must have length {raw.G.shape[0]}, got {gamma.shape}"
        )
    diag = np.diag(raw.G)
    V = raw.G / diag[:, None]
    np.fill_diagonal(V, 0.0)
    z = raw.sigma2 / diag
    return NetworkModel(V, z, gamma)


def sir(model: NetworkModel, p) -> np.ndarray:
    """SIR of every link at power vector p: p_k / ((V p)_k + z_k)."""
    p = np.asarray(p, dtype=float)
    if p.shape != (model.K,):
        raise DimensionError(f"p must have length {model.K}, got {p.shape}")
    if not np.all(p > 0):
        raise DomainError("p must be strictly positive")
    return p / (model.V @ p + model.z)


def constraint_levels(poly: ConstraintPolytope, p) -> np.ndarray:
    """Constraint utilizations g_n(p) = c_n^T p / P_n; membership is max <= 1."""
    p = np.asarray(p, dtype=float)
    if p.shape != (poly.K,):
        raise DimensionError(f"p must have length {poly.K}, got {p.shape}")
    return (poly.C @ p) / poly.p_hat
