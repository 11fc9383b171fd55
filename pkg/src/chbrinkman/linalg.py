"""Sparse linear systems and Krylov solvers.

Matrices are scipy.sparse CSR (sorted, in-range column indices per row --
exactly the compressed-row contract the rest of the package relies on).
The Krylov loops are written out here rather than taken from
scipy.sparse.linalg so that the stopping rule (true-residual based), the
Jacobi preconditioning and the reported statistics are fully deterministic
and under our control.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class SolveStats:
    iterations: int
    residual: float
    converged: bool


@dataclass(frozen=True)
class LinearSystem:
    """Assembled sparse operator and right-hand side."""

    matrix: sp.csr_matrix
    rhs: np.ndarray


class SolverFailure(RuntimeError):
    """Raised when a linear solve does not reach its tolerance."""

    def __init__(self, message: str, stats: SolveStats, stage: str = ""):
        super().__init__(message)
        self.stats = stats
        self.stage = stage


def _as_csr(a) -> sp.csr_matrix:
    a = sp.csr_matrix(a)
    a.sort_indices()
    return a


def jacobi_diagonal(a: sp.csr_matrix) -> np.ndarray:
    """Diagonal preconditioner entries; zero/non-finite diagonals fall back
    to 1 (continuity rows of saddle-point systems have no diagonal)."""
    d = np.asarray(a.diagonal(), dtype=float).copy()
    bad = ~np.isfinite(d) | (d == 0.0)
    d[bad] = 1.0
    return d


def cg_solve(a, b, tol: float = 1e-10, max_iter: int | None = None,
             mean_free: bool = False, precond_diag: np.ndarray | None = None):
    """Preconditioned conjugate gradients with zero initial guess.

    ``mean_free=True`` projects b onto the range of a singular Neumann-type
    operator (subtracts the mean) before solving.  Returns (x, SolveStats);
    the reported residual is the recomputed true residual ||Ax-b||_2.
    """
    a = _as_csr(a)
    b = np.asarray(b, dtype=float).ravel().copy()
    n = b.size
    if max_iter is None:
        max_iter = 10 * n
    if tol <= 0:
        raise ValueError("tol must be positive")
    if mean_free:
        b -= b.mean()

    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), SolveStats(0, 0.0, True)

    dinv = 1.0 / (jacobi_diagonal(a) if precond_diag is None else precond_diag)
    x = np.zeros(n)
    r = b.copy()
    z = dinv * r
    p = z.copy()
    rz = float(r @ z)
    it = 0
    while it < max_iter:
        ap = a @ p
        pap = float(p @ ap)
        if pap <= 0.0:
            break
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        it += 1
        if np.linalg.norm(r) <= tol * bnorm:
            break
        z = dinv * r
        rz_new = float(r @ z)
        beta = rz_new / rz
        rz = rz_new
        p = z + beta * p

    res = float(np.linalg.norm(b - a @ x))
    return x, SolveStats(it, res, res <= tol * bnorm)


def bicgstab_solve(a, b, tol: float = 1e-10, max_iter: int | None = None,
                   precond_diag: np.ndarray | None = None, ell: int = 1):
    """Jacobi-preconditioned BiCGStab(ell) with zero initial guess.

    ell = 1 is classical BiCGStab; ell = 2 (Sleijpen-Fokkema) is far more
    robust on indefinite saddle-point systems and is what the flow solves
    use.  Right preconditioning, so the stopping rule sees true residuals.
    Deterministic: fixed shadow residual, restart on (near-)breakdown.
    One reported iteration = one BiCG sweep (2*ell matrix-vector products).
    Non-convergence comes back via converged=False, never silently.
    """
    a = _as_csr(a)
    b = np.asarray(b, dtype=float).ravel()
    n = b.size
    if max_iter is None:
        max_iter = 10 * n
    if tol <= 0:
        raise ValueError("tol must be positive")
    if ell < 1:
        raise ValueError("ell must be at least 1")

    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), SolveStats(0, 0.0, True)

    dinv = 1.0 / (jacobi_diagonal(a) if precond_diag is None else precond_diag)

    def amul(v):
        return a @ (dinv * v)

    # iterate y with x = M^-1 y; residuals are the true residuals of A x = b
    y = np.zeros(n)
    r = [b.copy()] + [np.zeros(n) for _ in range(ell)]
    u = [np.zeros(n) for _ in range(ell + 1)]
    r_hat = b.copy()
    rho0, alpha, omega = 1.0, 0.0, 1.0
    it = 0
    restarts = 0
    refinements = 0
    rnorm = bnorm
    best = bnorm
    since_best = 0
    broke = False

    while it < max_iter:
        if rnorm <= tol * bnorm:
            # recursive residual converged; accept only if the true residual
            # agrees, otherwise restart from the current iterate (iterative
            # refinement against recurrence drift)
            true_r = b - amul(y)
            true_norm = float(np.linalg.norm(true_r))
            if true_norm <= tol * bnorm or refinements >= 4:
                break
            refinements += 1
            r[0] = true_r
            r_hat = true_r.copy()
            for i in range(1, ell + 1):
                r[i][:] = 0.0
            for i in range(ell + 1):
                u[i][:] = 0.0
            rho0, alpha, omega = 1.0, 0.0, 1.0
            rnorm = true_norm
            best = true_norm
            since_best = 0
            if rnorm <= tol * bnorm:
                break
        it += 1
        rho0 = -omega * rho0
        for j in range(ell):
            rho1 = float(r_hat @ r[j])
            if rho0 == 0.0 or not np.isfinite(rho1):
                broke = True
                break
            beta = alpha * rho1 / rho0
            rho0 = rho1
            for i in range(j + 1):
                u[i] = r[i] - beta * u[i]
            u[j + 1] = amul(u[j])
            gamma = float(r_hat @ u[j + 1])
            if gamma == 0.0 or not np.isfinite(gamma):
                broke = True
                break
            alpha = rho0 / gamma
            for i in range(j + 1):
                r[i] = r[i] - alpha * u[i + 1]
            r[j + 1] = amul(r[j])
            y += alpha * u[0]
        if not broke:
            # MR part: minimize ||r0 - sum g_i r_i|| over the ell new directions
            rr = np.array([[float(r[i] @ r[k]) for k in range(1, ell + 1)]
                           for i in range(1, ell + 1)])
            rhs = np.array([float(r[0] @ r[k]) for k in range(1, ell + 1)])
            try:
                gam = np.linalg.solve(rr, rhs)
            except np.linalg.LinAlgError:
                broke = True
            if not broke and np.all(np.isfinite(gam)) and gam[-1] != 0.0:
                omega = gam[-1]
                for i in range(ell):
                    y += gam[i] * r[i]
                    r[0] = r[0] - gam[i] * r[i + 1]
                    u[0] = u[0] - gam[i] * u[i + 1]
            else:
                broke = True
        rnorm = float(np.linalg.norm(r[0]))
        if not np.isfinite(rnorm):
            broke = True
        if broke:
            restarts += 1
            if restarts > 100:
                break
            r[0] = b - amul(y)
            r_hat = r[0].copy()
            for i in range(1, ell + 1):
                r[i][:] = 0.0
            for i in range(ell + 1):
                u[i][:] = 0.0
            rho0, alpha, omega = 1.0, 0.0, 1.0
            rnorm = float(np.linalg.norm(r[0]))
            broke = False
            continue
        if rnorm < 0.9999 * best:
            best = rnorm
            since_best = 0
        else:
            since_best += 1
            if since_best > 5000:
                break  # stagnation: give up honestly

    x = dinv * y
    res = float(np.linalg.norm(b - a @ x))
    return x, SolveStats(it, res, res <= tol * bnorm)
