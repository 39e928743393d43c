"""Follower subgame: user demand under social externality.

The users' purchase probabilities solve a box-bounded linear
complementarity system. Three solvers are provided: the closed form valid
when every user is interior, a projected Gauss-Seidel iteration for the
general clamped case, and an exhaustive partition enumeration used as the
verification oracle on small instances.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import ContractionViolation, ConvergenceError, UniquenessViolation

POWER_ITER_TOL = 1e-10
POWER_ITER_CAP = 100_000
LCP_TOL = 1e-10
LCP_ITER_CAP = 10**6
BRUTE_FORCE_MAX_USERS = 12


class Segment(enum.IntEnum):
    """Which branch of the demand system a user sits on."""

    OPT_OUT = 0      # x = 0, strictly negative surplus margin
    INTERIOR = 1     # 0 <= x <= 1, zero margin
    SATURATED = 2    # x = 1, strictly positive margin


@dataclass(frozen=True, eq=False)
class ExternalityGraph:
    """Nonnegative influence weights between users, scaled by alpha.

    weights[i, j] is how strongly user j's purchase decision raises user i's
    utility; the diagonal must be zero. alpha scales the whole network.
    """

    weights: np.ndarray
    alpha: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"weights must be a square matrix, got shape {w.shape}")
        if np.any(w < 0):
            raise ValueError("externality weights must be nonnegative")
        if np.any(np.diagonal(w) != 0):
            raise ValueError("externality weights must have a zero diagonal")
        if self.alpha < 0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n_users(self) -> int:
        return self.weights.shape[0]

    @cached_property
    def system_matrix(self) -> np.ndarray:
        """I - alpha * G; the demand system's coefficient matrix."""
        return np.eye(self.n_users) - self.alpha * self.weights

    @cached_property
    def _lu(self):
        return lu_factor(self.system_matrix)

    def solve(self, rhs: np.ndarray, transpose: bool = False) -> np.ndarray:
        """Solve (I - alpha G) x = rhs (or its transpose) via the cached LU."""
        out = lu_solve(self._lu, np.asarray(rhs, dtype=float), trans=1 if transpose else 0)
        if not np.all(np.isfinite(out)):
            raise np.linalg.LinAlgError("demand system is numerically singular")
        return out

    @cached_property
    def ones_image(self) -> np.ndarray:
        """(I - alpha G)^{-1} 1, the amplification each user gets from the network."""
        out = self.solve(np.ones(self.n_users))
        out.setflags(write=False)
        return out

    @cached_property
    def ones_image_t(self) -> np.ndarray:
        """(I - alpha G)^{-T} 1 (column sums of the inverse)."""
        out = self.solve(np.ones(self.n_users), transpose=True)
        out.setflags(write=False)
        return out

    @cached_property
    def total_amplification(self) -> float:
        """1^T (I - alpha G)^{-1} 1."""
        return float(np.sum(self.ones_image))

    @cached_property
    def influence(self) -> np.ndarray:
        """The full inverse (I - alpha G)^{-1}; materialized once for Hessians."""
        out = lu_solve(self._lu, np.eye(self.n_users))
        out.setflags(write=False)
        return out


@dataclass(frozen=True, eq=False)
class DemandProfile:
    """Solved purchase probabilities with their thresholds and branch labels."""

    x: np.ndarray
    thresholds: np.ndarray
    partition: np.ndarray

    @property
    def total(self) -> float:
        return float(np.sum(self.x))

    def out_of_box(self, tol: float = 1e-9) -> bool:
        """True when any component leaves [0, 1] by more than tol."""
        return bool(np.any(self.x < -tol) or np.any(self.x > 1.0 + tol))


@dataclass(frozen=True)
class ContractionCheck:
    holds: bool
    alpha_rho: float


def spectral_radius(matrix: np.ndarray, tol: float = POWER_ITER_TOL,
                    max_iters: int = POWER_ITER_CAP) -> float:
    """Perron root of a nonnegative matrix by shifted power iteration.

    The shift (5% of the max row sum) breaks the +/-rho eigenvalue tie of
    bipartite-like matrices; for a nonnegative matrix the Perron root moves
    by exactly the shift, so it is subtracted back out.
    """
    g = np.asarray(matrix, dtype=float)
    n = g.shape[0]
    row_bound = float(g.sum(axis=1).max()) if n else 0.0
    if row_bound == 0.0:
        return 0.0
    shift = 0.05 * row_bound
    x = np.full(n, 1.0 / np.sqrt(n))
    estimate = 0.0
    for _ in range(max_iters):
        y = g @ x + shift * x
        norm = float(np.linalg.norm(y))
        if norm == 0.0:
            return 0.0
        x = y / norm
        new_estimate = float(x @ (g @ x)) + shift
        if abs(new_estimate - estimate) <= tol * max(abs(new_estimate), 1e-300):
            return new_estimate - shift
        estimate = new_estimate
    raise ConvergenceError(
        f"power iteration did not converge within {max_iters} iterations",
        residual=abs(new_estimate - estimate),
    )


def check_contraction(graph: ExternalityGraph) -> ContractionCheck:
    """Whether alpha * rho(G) < 1, the condition for a unique demand equilibrium."""
    alpha_rho = graph.alpha * spectral_radius(graph.weights)
    return ContractionCheck(holds=alpha_rho < 1.0, alpha_rho=alpha_rho)


def user_utility(graph: ExternalityGraph, i: int, theta_i: float, hbar: float,
                 p_i: float, x: np.ndarray) -> float:
    """Utility of user i: security + private value - price + network pull."""
    x = np.asarray(x, dtype=float)
    if not 0 <= i < graph.n_users:
        raise IndexError(f"user index {i} out of range for {graph.n_users} users")
    return hbar + theta_i - p_i + graph.alpha * float(graph.weights[i] @ x)


def _require_contraction(graph: ExternalityGraph) -> None:
    chk = check_contraction(graph)
    if not chk.holds:
        raise ContractionViolation(chk.alpha_rho)


def _profile_from(graph: ExternalityGraph, hbar: float, p: np.ndarray,
                  x: np.ndarray, partition: np.ndarray | None = None,
                  tol: float = 1e-9) -> DemandProfile:
    p = np.asarray(p, dtype=float)
    thresholds = p - hbar - graph.alpha * (graph.weights @ x)
    if partition is None:
        residual = (1.0 + hbar) - p - graph.system_matrix @ x
        partition = np.full(graph.n_users, Segment.INTERIOR, dtype=np.int8)
        partition[residual < -tol] = Segment.OPT_OUT
        partition[residual > tol] = Segment.SATURATED
    for arr in (x, thresholds, partition):
        arr.setflags(write=False)
    return DemandProfile(x=x, thresholds=thresholds, partition=partition)


def closed_form_demand(graph: ExternalityGraph, hbar: float, p: np.ndarray) -> DemandProfile:
    """Interior demand solution x = (I - alpha G)^{-1} [(1 + hbar) 1 - p].

    No clamping: components outside [0, 1] are returned as-is so callers can
    detect when the interior regime does not apply (DemandProfile.out_of_box).
    """
    _require_contraction(graph)
    p = np.asarray(p, dtype=float)
    if p.shape != (graph.n_users,):
        raise ValueError(f"price vector has shape {p.shape}, expected ({graph.n_users},)")
    x = graph.solve((1.0 + hbar) * np.ones(graph.n_users) - p)
    return _profile_from(graph, hbar, p, x)


def lcp_demand(graph: ExternalityGraph, hbar: float, p: np.ndarray,
               tol: float = LCP_TOL, max_iters: int = LCP_ITER_CAP) -> DemandProfile:
    """Unique clamped demand equilibrium via projected Gauss-Seidel.

    Each sweep updates x_i <- clamp(b_i + alpha (G x)_i, 0, 1) in place
    (the system diagonal is 1 because the weight diagonal is zero), and the
    iteration stops when the fixed-point residual
    || x - clamp(b + alpha G x, 0, 1) ||_inf drops below tol.
    """
    _require_contraction(graph)
    p = np.asarray(p, dtype=float)
    n = graph.n_users
    if p.shape != (n,):
        raise ValueError(f"price vector has shape {p.shape}, expected ({n},)")
    b = (1.0 + hbar) - p
    scaled = graph.alpha * graph.weights
    x = np.clip(b, 0.0, 1.0)
    sweeps_cap = max(1, max_iters // max(n, 1))
    for _ in range(sweeps_cap):
        for i in range(n):
            x[i] = min(1.0, max(0.0, b[i] + scaled[i] @ x))
        residual = float(np.max(np.abs(x - np.clip(b + scaled @ x, 0.0, 1.0))))
        if residual < tol:
            return _profile_from(graph, hbar, p, x, tol=tol)
    raise ConvergenceError(
        "projected Gauss-Seidel hit its iteration cap",
        last_iterate=x, residual=residual,
    )


def brute_force_lcp(graph: ExternalityGraph, hbar: float, p: np.ndarray) -> DemandProfile:
    """Demand equilibrium by exhaustive enumeration of user partitions.

    Tries all 3^n assignments of users to opt-out / interior / saturated,
    solves the linear subsystem on the interior set, and keeps assignments
    whose sign conditions all hold. Exactly one must survive; anything else
    is reported as a uniqueness violation. Verification oracle only (n <= 12).
    """
    n = graph.n_users
    if n > BRUTE_FORCE_MAX_USERS:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_MAX_USERS} users, got {n}")
    _require_contraction(graph)
    p = np.asarray(p, dtype=float)
    a_mat = graph.system_matrix
    b = (1.0 + hbar) - p
    consistent: list[tuple[np.ndarray, np.ndarray]] = []
    labels = (Segment.OPT_OUT, Segment.INTERIOR, Segment.SATURATED)
    for assign in itertools.product(labels, repeat=n):
        partition = np.array(assign, dtype=np.int8)
        free = partition == Segment.INTERIOR
        ones = partition == Segment.SATURATED
        x = np.zeros(n)
        x[ones] = 1.0
        if free.any():
            sub = a_mat[np.ix_(free, free)]
            rhs = b[free] - a_mat[np.ix_(free, ones)] @ x[ones]
            try:
                x_free = np.linalg.solve(sub, rhs)
            except np.linalg.LinAlgError:
                continue
            if not np.all(np.isfinite(x_free)):
                continue
            # closed unit box, tiny slack for the solve's roundoff
            if np.any(x_free < -1e-12) or np.any(x_free > 1.0 + 1e-12):
                continue
            x[free] = np.clip(x_free, 0.0, 1.0)
        residual = b - a_mat @ x
        if np.any(residual[partition == Segment.OPT_OUT] >= 0):
            continue
        if np.any(residual[ones] <= 0):
            continue
        consistent.append((partition, x))
    if len(consistent) != 1:
        raise UniquenessViolation(
            f"expected exactly one consistent partition, found {len(consistent)}"
        )
    partition, x = consistent[0]
    return _profile_from(graph, hbar, p, x, partition=partition)
