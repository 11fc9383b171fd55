"""Uniform rectangular 2D MAC mesh and its discrete operators.

Layout conventions used everywhere in this package:

* cell fields   -- arrays of shape (nx, ny), value at cell center
                   ((i+1/2)*dx, (j+1/2)*dy)
* face fields   -- x-components on the (nx+1, ny) vertical faces at
                   (i*dx, (j+1/2)*dy), y-components on the (nx, ny+1)
                   horizontal faces at ((i+1/2)*dx, j*dy)
* boundary fields -- one value per boundary face, ordered
                   (bottom, right, top, left), each side traversed in
                   increasing coordinate; total length 2*(nx+ny)

All operators are pure functions of their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CellField = np.ndarray
BoundaryField = np.ndarray


@dataclass(frozen=True)
class Grid2D:
    nx: int
    ny: int
    lx: float = 1.0
    ly: float = 1.0

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise ValueError(f"grid needs nx, ny >= 3, got {self.nx}x{self.ny}")
        if self.lx <= 0 or self.ly <= 0:
            raise ValueError("domain lengths must be positive")

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    @property
    def cell_volume(self) -> float:
        return self.dx * self.dy

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    def cell_centers(self):
        """Meshgrid (X, Y) of cell centers, each of shape (nx, ny)."""
        x = (np.arange(self.nx) + 0.5) * self.dx
        y = (np.arange(self.ny) + 0.5) * self.dy
        return np.meshgrid(x, y, indexing="ij")

    def xface_centers(self):
        x = np.arange(self.nx + 1) * self.dx
        y = (np.arange(self.ny) + 0.5) * self.dy
        return np.meshgrid(x, y, indexing="ij")

    def yface_centers(self):
        x = (np.arange(self.nx) + 0.5) * self.dx
        y = np.arange(self.ny + 1) * self.dy
        return np.meshgrid(x, y, indexing="ij")

    def n_boundary_faces(self) -> int:
        return 2 * (self.nx + self.ny)


@dataclass
class FaceField:
    """Staggered vector field: x on (nx+1, ny) faces, y on (nx, ny+1) faces."""

    x: np.ndarray
    y: np.ndarray

    def copy(self) -> "FaceField":
        return FaceField(self.x.copy(), self.y.copy())

    def __add__(self, other: "FaceField") -> "FaceField":
        return FaceField(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "FaceField") -> "FaceField":
        return FaceField(self.x - other.x, self.y - other.y)

    def __mul__(self, a: float) -> "FaceField":
        return FaceField(self.x * a, self.y * a)

    __rmul__ = __mul__

    def norm_l2(self, g: Grid2D) -> float:
        """Discrete L2 norm with half cell volumes on boundary faces."""
        wx, wy = face_volumes(g)
        return float(np.sqrt(np.sum(wx * self.x**2) + np.sum(wy * self.y**2)))


def face_zeros(g: Grid2D) -> FaceField:
    return FaceField(np.zeros((g.nx + 1, g.ny)), np.zeros((g.nx, g.ny + 1)))


def face_volumes(g: Grid2D):
    """Control volumes attached to faces (half cells on the boundary)."""
    wx = np.full((g.nx + 1, g.ny), g.cell_volume)
    wx[0, :] *= 0.5
    wx[-1, :] *= 0.5
    wy = np.full((g.nx, g.ny + 1), g.cell_volume)
    wy[:, 0] *= 0.5
    wy[:, -1] *= 0.5
    return wx, wy


def gradient_to_faces(g: Grid2D, f: CellField) -> FaceField:
    """Two-point differences on interior faces, zero on boundary faces
    (homogeneous Neumann default)."""
    gx = np.zeros((g.nx + 1, g.ny))
    gy = np.zeros((g.nx, g.ny + 1))
    gx[1:-1, :] = (f[1:, :] - f[:-1, :]) / g.dx
    gy[:, 1:-1] = (f[:, 1:] - f[:, :-1]) / g.dy
    return FaceField(gx, gy)


def divergence_of_faces(g: Grid2D, w: FaceField) -> CellField:
    return (w.x[1:, :] - w.x[:-1, :]) / g.dx + (w.y[:, 1:] - w.y[:, :-1]) / g.dy


def laplacian_neumann(g: Grid2D, f: CellField) -> CellField:
    """5-point Laplacian with zero-flux closure; annihilates constants."""
    return divergence_of_faces(g, gradient_to_faces(g, f))


def integrate_cells(g: Grid2D, f: CellField) -> float:
    return float(np.sum(f) * g.cell_volume)


def norm_l2_cells(g: Grid2D, f: CellField) -> float:
    return float(np.sqrt(np.sum(f**2) * g.cell_volume))


def _upwind_flux(g: Grid2D, phi: CellField, vel: FaceField):
    """Face fluxes v*phi_upwind; boundary faces use the interior cell value."""
    fx = np.empty((g.nx + 1, g.ny))
    vx_in = vel.x[1:-1, :]
    fx[1:-1, :] = vx_in * np.where(vx_in > 0, phi[:-1, :], phi[1:, :])
    fx[0, :] = vel.x[0, :] * phi[0, :]
    fx[-1, :] = vel.x[-1, :] * phi[-1, :]

    fy = np.empty((g.nx, g.ny + 1))
    vy_in = vel.y[:, 1:-1]
    fy[:, 1:-1] = vy_in * np.where(vy_in > 0, phi[:, :-1], phi[:, 1:])
    fy[:, 0] = vel.y[:, 0] * phi[:, 0]
    fy[:, -1] = vel.y[:, -1] * phi[:, -1]
    return FaceField(fx, fy)


def advect_upwind(g: Grid2D, phi: CellField, vel: FaceField) -> CellField:
    """Conservative first-order upwind discretization of div(phi*v)."""
    return divergence_of_faces(g, _upwind_flux(g, phi, vel))


def boundary_flux_integral(g: Grid2D, phi: CellField, vel: FaceField) -> float:
    """Discrete boundary integral of phi*(v.n), same upwinding convention as
    advect_upwind so that integrate_cells(advect_upwind(..)) telescopes to it."""
    out = 0.0
    out += float(np.sum(vel.x[-1, :] * phi[-1, :])) * g.dy   # right,  n=+x
    out -= float(np.sum(vel.x[0, :] * phi[0, :])) * g.dy     # left,   n=-x
    out += float(np.sum(vel.y[:, -1] * phi[:, -1])) * g.dx   # top,    n=+y
    out -= float(np.sum(vel.y[:, 0] * phi[:, 0])) * g.dx     # bottom, n=-y
    return out


# boundary face bookkeeping -------------------------------------------------

def boundary_pack(g: Grid2D, bottom, right, top, left) -> BoundaryField:
    bottom = np.broadcast_to(np.asarray(bottom, dtype=float), (g.nx,))
    top = np.broadcast_to(np.asarray(top, dtype=float), (g.nx,))
    right = np.broadcast_to(np.asarray(right, dtype=float), (g.ny,))
    left = np.broadcast_to(np.asarray(left, dtype=float), (g.ny,))
    return np.concatenate([bottom, right, top, left])


def boundary_unpack(g: Grid2D, b: BoundaryField):
    """Split a packed boundary field into (bottom, right, top, left)."""
    b = np.asarray(b, dtype=float)
    if b.shape != (g.n_boundary_faces(),):
        raise ValueError(
            f"boundary field must have length {g.n_boundary_faces()}, got {b.shape}"
        )
    nx, ny = g.nx, g.ny
    return b[:nx], b[nx:nx + ny], b[nx + ny:2 * nx + ny], b[2 * nx + ny:]


def boundary_constant(g: Grid2D, value: float) -> BoundaryField:
    return np.full(g.n_boundary_faces(), float(value))


def boundary_face_centers(g: Grid2D):
    """(x, y) coordinates of boundary face centers in packed order."""
    xc = (np.arange(g.nx) + 0.5) * g.dx
    yc = (np.arange(g.ny) + 0.5) * g.dy
    xs = np.concatenate([xc, np.full(g.ny, g.lx), xc, np.zeros(g.ny)])
    ys = np.concatenate([np.zeros(g.nx), yc, np.full(g.nx, g.ly), yc])
    return xs, ys


def boundary_face_lengths(g: Grid2D) -> np.ndarray:
    return np.concatenate([
        np.full(g.nx, g.dx), np.full(g.ny, g.dy),
        np.full(g.nx, g.dx), np.full(g.ny, g.dy),
    ])


def boundary_adjacent_cells(g: Grid2D):
    """Flat cell indices (C-order, idx = i*ny + j) adjacent to each boundary
    face, packed order."""
    nx, ny = g.nx, g.ny
    i = np.arange(nx)
    j = np.arange(ny)
    bottom = i * ny + 0
    right = (nx - 1) * ny + j
    top = i * ny + (ny - 1)
    left = 0 * ny + j
    return np.concatenate([bottom, right, top, left])


def boundary_normal_spacing(g: Grid2D) -> np.ndarray:
    """Mesh spacing normal to each boundary face, packed order."""
    return np.concatenate([
        np.full(g.nx, g.dy), np.full(g.ny, g.dx),
        np.full(g.nx, g.dy), np.full(g.ny, g.dx),
    ])
