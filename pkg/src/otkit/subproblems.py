"""Inner solvers used by every outer iteration.

Three subproblems appear: selecting the best k entries of a candidate by
residual (exactly, via enumeration, or through its convex relaxation over the
capped simplex), and re-fitting least squares on a fixed support.  The capped
simplex {w : sum(w) = k, 0 <= w <= 1} is the convex hull of the binary
selectors with exactly k ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import as_matrix, as_vector
from .errors import EnumerationGuardError

# Exhaustive k-subset enumeration is only viable as a desk-scale oracle.
BINARY_ENUM_MAX_N = 30


@dataclass(frozen=True)
class QPSolverConfig:
    """Stopping controls for the projected-gradient solver of the relaxed problem.

    grad_tol bounds the norm of w - proj(w - grad f(w)/L); objective_rel_tol is
    the relative objective change treated as stagnation.
    """

    max_inner_iter: int = 2000
    grad_tol: float = 1e-9
    objective_rel_tol: float = 1e-12

    def __post_init__(self):
        if self.max_inner_iter < 1:
            raise ValueError("max_inner_iter must be positive")
        if self.grad_tol <= 0 or self.objective_rel_tol <= 0:
            raise ValueError("tolerances must be positive")


def project_capped_simplex(v, k):
    """Euclidean projection of v onto {w : sum(w) = k, 0 <= w <= 1}.

    The projection is clip(v - lam, 0, 1) for the scalar lam at which the
    clipped mass equals k.  The mass is a piecewise-linear non-increasing
    function of lam with breakpoints at v_i and v_i - 1, so lam is located
    exactly by a sorted sweep over the 2n breakpoints.
    """
    v = as_vector(v)
    n = v.size
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range 1..{n}")
    if k == n:
        return np.ones(n)

    events = np.concatenate([v, v - 1.0])
    kinds = np.concatenate([np.ones(n), -np.ones(n)])  # +1 activates, -1 saturates
    order = np.argsort(-events, kind="stable")
    lam = events[order]
    slope = np.cumsum(kinds[order])  # active-coordinate count below each event
    gaps = lam[:-1] - lam[1:]
    mass = np.concatenate([[0.0], np.cumsum(slope[:-1] * gaps)])

    j = int(np.searchsorted(mass, k, side="left"))  # first event with mass >= k
    if j == 0:
        lam_star = lam[0]
    elif mass[j - 1] >= k:
        lam_star = lam[j - 1]
    else:
        lam_star = lam[j - 1] - (k - mass[j - 1]) / slope[j - 1]
    w = np.clip(v - lam_star, 0.0, 1.0)

    # One exact correction on the identified face absorbs accumulated
    # round-off from the prefix sums (and any coincident breakpoints).
    active = (w > 0.0) & (w < 1.0)
    n_active = int(active.sum())
    excess = float(w.sum()) - k
    if n_active > 0 and excess != 0.0:
        w = np.clip(v - (lam_star + excess / n_active), 0.0, 1.0)
    return w


def _largest_eigenvalue(G, tol=1e-12, max_iter=500):
    """Power iteration for the top eigenvalue of a symmetric PSD matrix."""
    n = G.shape[0]
    z = np.full(n, 1.0 / math.sqrt(n))
    lam = 0.0
    for _ in range(max_iter):
        Gz = G @ z
        nz = float(np.linalg.norm(Gz))
        if nz == 0.0:
            return 0.0
        z = Gz / nz
        new = float(z @ (G @ z))
        if abs(new - lam) <= tol * max(1.0, abs(new)):
            return new
        lam = new
    return lam


def solve_relaxed_ot(A, y, v, k, cfg=None):
    """Minimise ||y - A (v*w)||^2 over the capped simplex {sum(w)=k, 0<=w<=1}.

    Accelerated projected gradient with a monotone restart: an accelerated
    step that would increase the objective is rejected and the momentum is
    reset, so accepted objectives never increase.  The step is 1/L with L the
    top eigenvalue of (A diag(v))^T (A diag(v)) from power iteration.

    Returns (w, converged).  On non-convergence within max_inner_iter the
    best iterate found so far is returned with converged=False; the caller
    decides whether that is acceptable.
    """
    A = as_matrix(A, "A")
    y = as_vector(y, "y")
    v = as_vector(v, "v")
    m, n = A.shape
    if y.size != m or v.size != n:
        raise ValueError(f"incompatible shapes: A is {A.shape}, y has {y.size}, v has {v.size}")
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range 1..{n}")
    if cfg is None:
        cfg = QPSolverConfig()

    B = A * v  # columns scaled by v
    G = B.T @ B
    c = B.T @ y
    yy = float(y @ y)
    L = _largest_eigenvalue(G) * 1.02  # slight inflation keeps 1/L a safe step

    w = np.full(n, k / n)  # feasible interior start
    if L <= 0.0:
        # v = 0 (or A v = 0): objective constant, any feasible point optimal.
        return w, True

    def objective(w_, Gw_):
        return yy - 2.0 * float(c @ w_) + float(w_ @ Gw_)

    Gw = G @ w
    fw = objective(w, Gw)
    zk = w.copy()
    t_mom = 1.0
    stall = 0
    for it in range(cfg.max_inner_iter):
        w_new = project_capped_simplex(zk - (G @ zk - c) / L, k)
        Gw_new = G @ w_new
        f_new = objective(w_new, Gw_new)
        if f_new > fw:  # monotone restart
            w_new, Gw_new, f_new = w, Gw, fw
            zk = w.copy()
            t_mom = 1.0
        rel_drop = abs(fw - f_new) / max(1.0, abs(fw))
        stall = stall + 1 if rel_drop <= cfg.objective_rel_tol else 0
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_mom * t_mom))
        zk = w_new + ((t_mom - 1.0) / t_next) * (w_new - w)
        w, Gw, fw, t_mom = w_new, Gw_new, f_new, t_next
        if stall >= 4 or (it & 15) == 15:
            pg = np.linalg.norm(w - project_capped_simplex(w - (Gw - c) / L, k))
            if pg <= cfg.grad_tol:
                return w, True
        if stall >= 8:  # objective_rel_tol met repeatedly
            return w, True
    return w, False


def solve_binary_ot(A, y, v, k):
    """Exact best binary selector: minimise ||y - A (v*w)||^2 over w in {0,1}^n, sum(w)=k.

    Exhaustive enumeration over all k-subsets in lexicographic order; ties keep
    the lexicographically smallest support.  Refuses n > 30, where C(n, k) stops
    being a practical oracle, directing callers to the relaxation.

    Returns (w, objective).
    """
    A = as_matrix(A, "A")
    y = as_vector(y, "y")
    v = as_vector(v, "v")
    m, n = A.shape
    if y.size != m or v.size != n:
        raise ValueError(f"incompatible shapes: A is {A.shape}, y has {y.size}, v has {v.size}")
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range 1..{n}")
    if n > BINARY_ENUM_MAX_N:
        raise EnumerationGuardError(
            f"binary selection enumerates C({n},{k}) subsets; refusing n > "
            f"{BINARY_ENUM_MAX_N} (use the capped-simplex relaxation instead)"
        )

    B = A * v
    best_obj = math.inf
    best_support = None
    for S in combinations(range(n), k):
        r = y - B[:, S].sum(axis=1)
        obj = float(r @ r)
        if obj < best_obj:  # strict '<' keeps the lexicographically first tie
            best_obj = obj
            best_support = S
    w = np.zeros(n)
    w[list(best_support)] = 1.0
    return w, best_obj


def least_squares_on_support(A, y, support):
    """Least squares restricted to a support: min ||y - A x||_2 with supp(x) in support.

    Solved through an orthogonal factorisation of the column submatrix.  When
    that submatrix is numerically rank deficient (singular values below
    1e-12 of the largest) the minimum-norm solution is returned and the flag
    is set.

    Returns (x, rank_deficient).
    """
    A = as_matrix(A, "A")
    y = as_vector(y, "y")
    m, n = A.shape
    if y.size != m:
        raise ValueError(f"y has length {y.size}, expected {m}")
    idx = np.asarray(support, dtype=int)
    if idx.size == 0:
        return np.zeros(n), False
    if idx.min() < 0 or idx.max() >= n:
        raise ValueError("support indices out of range")
    if np.unique(idx).size != idx.size:
        raise ValueError("support contains duplicate indices")

    coef, _, rank, _ = np.linalg.lstsq(A[:, idx], y, rcond=1e-12)
    x = np.zeros(n)
    x[idx] = coef
    return x, rank < idx.size
