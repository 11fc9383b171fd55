"""Quasi-static nutrient solves: -lap(sigma) + h(phi)*sigma = extra_rhs with
Robin flux d_n sigma = K*(sigma_inf - sigma), plus the Dirichlet mode used as
the large-K reference.

Robin ghost closure (second order, keeps the matrix SPD): eliminating the
ghost value from
    (sigma_ghost - sigma_c)/delta = K*(sigma_inf - (sigma_ghost+sigma_c)/2)
turns the boundary-face flux into K_eff*(sigma_inf - sigma_c) with
K_eff = K/(1 + K*delta/2); K -> inf recovers the Dirichlet ghost 2/delta.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .grid import (BoundaryField, CellField, Grid2D, boundary_adjacent_cells,
                   boundary_face_lengths, boundary_normal_spacing)
from .linalg import LinearSystem, SolverFailure, cg_solve


def _as_boundary(g: Grid2D, sigma_inf) -> BoundaryField:
    arr = np.asarray(sigma_inf, dtype=float)
    if arr.ndim == 0:
        return np.full(g.n_boundary_faces(), float(arr))
    if arr.shape != (g.n_boundary_faces(),):
        raise ValueError(
            f"sigma_inf must be scalar or length {g.n_boundary_faces()}")
    return arr


def _interior_laplacian(g: Grid2D) -> sp.csr_matrix:
    """Minus the 5-point Laplacian with zero-flux boundary faces, on flat
    cell indices (i*ny + j)."""
    nx, ny = g.nx, g.ny
    main_x = np.full(nx, 2.0)
    main_x[0] = main_x[-1] = 1.0
    lx1d = sp.diags([main_x, -np.ones(nx - 1), -np.ones(nx - 1)],
                    [0, 1, -1]) / g.dx**2
    main_y = np.full(ny, 2.0)
    main_y[0] = main_y[-1] = 1.0
    ly1d = sp.diags([main_y, -np.ones(ny - 1), -np.ones(ny - 1)],
                    [0, 1, -1]) / g.dy**2
    return (sp.kron(lx1d, sp.identity(ny)) +
            sp.kron(sp.identity(nx), ly1d)).tocsr()


def assemble_nutrient_system(g: Grid2D, phi: CellField, spec, sigma_inf,
                             mode: str = "robin",
                             extra_rhs: CellField | None = None) -> LinearSystem:
    if not np.all(np.isfinite(phi)):
        raise ValueError("non-finite phi passed to nutrient solve")
    sig_inf = _as_boundary(g, sigma_inf)
    if not np.all(np.isfinite(sig_inf)):
        raise ValueError("non-finite sigma_inf passed to nutrient solve")

    h = np.asarray(spec.sources.h(phi), dtype=float)
    if np.any(h < 0):
        raise ValueError("(A4): h(phi) must be non-negative")
    a = _interior_laplacian(g) + sp.diags(h.ravel())

    delta = boundary_normal_spacing(g)
    if mode == "robin":
        K = spec.params.K
        if K <= 0:
            raise ValueError("(A1): boundary permeability K must be positive")
        k_eff = K / (1.0 + K * delta / 2.0)
    elif mode == "dirichlet":
        k_eff = 2.0 / delta
    else:
        raise ValueError(f"unknown nutrient mode {mode!r}")

    cells = boundary_adjacent_cells(g)
    diag_add = np.zeros(g.n_cells)
    np.add.at(diag_add, cells, k_eff / delta)
    a = (a + sp.diags(diag_add)).tocsr()
    a.sort_indices()

    b = np.zeros(g.n_cells)
    np.add.at(b, cells, k_eff * sig_inf / delta)
    if extra_rhs is not None:
        b += np.asarray(extra_rhs, dtype=float).ravel()
    return LinearSystem(a, b)


def _solve(g, phi, spec, sigma_inf, mode, extra_rhs, tol):
    system = assemble_nutrient_system(g, phi, spec, sigma_inf, mode, extra_rhs)
    x, stats = cg_solve(system.matrix, system.rhs, tol=tol)
    if not stats.converged:
        raise SolverFailure(
            f"nutrient {mode} solve did not converge "
            f"(residual {stats.residual:.3e} after {stats.iterations} iterations)",
            stats, stage="nutrient")
    return x.reshape(g.nx, g.ny), stats


def solve_nutrient_robin(g: Grid2D, phi: CellField, spec, sigma_inf,
                         extra_rhs: CellField | None = None,
                         tol: float = 1e-10):
    """Robin nutrient solve; returns (sigma, SolveStats)."""
    return _solve(g, phi, spec, sigma_inf, "robin", extra_rhs, tol)


def solve_nutrient_dirichlet(g: Grid2D, phi: CellField, spec, sigma_inf,
                             extra_rhs: CellField | None = None,
                             tol: float = 1e-10):
    """Dirichlet (K -> infinity) nutrient solve; returns (sigma, SolveStats)."""
    return _solve(g, phi, spec, sigma_inf, "dirichlet", extra_rhs, tol)


def boundary_trace(g: Grid2D, sigma: CellField, sigma_inf, K: float):
    """Per-face trace gap sigma_face - sigma_inf and its L2(boundary) norm.

    sigma_face is reconstructed with the same Robin interpolant the solver
    eliminates: sigma_face = (sigma_c + (K*delta/2)*sigma_inf)/(1+K*delta/2),
    so the gap is (sigma_c - sigma_inf)/(1 + K*delta/2).  K = inf gives a
    zero gap (Dirichlet trace).
    """
    sig_inf = _as_boundary(g, sigma_inf)
    cells = boundary_adjacent_cells(g)
    delta = boundary_normal_spacing(g)
    sig_c = sigma.ravel()[cells]
    with np.errstate(invalid="ignore"):
        denom = 1.0 + K * delta / 2.0
    if np.isinf(K):
        gap = np.zeros_like(sig_c)
    else:
        gap = (sig_c - sig_inf) / denom
    norm = float(np.sqrt(np.sum(gap**2 * boundary_face_lengths(g))))
    return gap, norm
