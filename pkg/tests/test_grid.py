import numpy as np
import pytest

from chbrinkman import (FaceField, Grid2D, advect_upwind,
                        boundary_flux_integral, divergence_of_faces,
                        face_zeros, gradient_to_faces, integrate_cells,
                        laplacian_neumann)
from chbrinkman.grid import boundary_face_lengths, boundary_pack


def random_cell(g, rng):
    return rng.standard_normal((g.nx, g.ny))


def random_face(g, rng):
    return FaceField(rng.standard_normal((g.nx + 1, g.ny)),
                     rng.standard_normal((g.nx, g.ny + 1)))


def test_grid_rejects_tiny_meshes():
    with pytest.raises(ValueError):
        Grid2D(2, 8)
    with pytest.raises(ValueError):
        Grid2D(8, 8, lx=-1.0)


def test_gradient_of_constant_is_zero():
    g = Grid2D(8, 6, 2.0, 1.0)
    grad = gradient_to_faces(g, np.full((8, 6), 3.7))
    assert np.all(grad.x == 0.0) and np.all(grad.y == 0.0)


def test_gradient_linear_exact():
    g = Grid2D(12, 9, 1.5, 1.0)
    x, _ = g.cell_centers()
    grad = gradient_to_faces(g, x)
    assert np.allclose(grad.x[1:-1, :], 1.0, atol=1e-13)
    assert np.allclose(grad.y, 0.0, atol=1e-13)


def test_gradient_second_order_on_sine():
    errs = []
    for n in (16, 32, 64):
        g = Grid2D(n, n)
        x, _ = g.cell_centers()
        f = np.sin(2 * np.pi * x / g.lx)
        xf, _ = g.xface_centers()
        exact = 2 * np.pi / g.lx * np.cos(2 * np.pi * xf / g.lx)
        grad = gradient_to_faces(g, f)
        errs.append(np.max(np.abs(grad.x[1:-1, :] - exact[1:-1, :])))
    # halving dx quarters the error
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.15)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.15)


def test_divergence_of_constant_field():
    g = Grid2D(7, 5)
    w = FaceField(np.full((8, 5), 2.0), np.full((7, 6), -1.0))
    assert np.allclose(divergence_of_faces(g, w), 0.0, atol=1e-13)


def test_div_grad_equals_laplacian():
    g = Grid2D(9, 11, 1.0, 2.0)
    x, y = g.cell_centers()
    f = x**2 + 0.5 * x * y - y**2
    composed = divergence_of_faces(g, gradient_to_faces(g, f))
    assert np.allclose(composed, laplacian_neumann(g, f), atol=1e-13)


def test_summation_by_parts(rng):
    g = Grid2D(10, 13, 1.3, 0.7)
    f = random_cell(g, rng)
    w = random_face(g, rng)
    vol = g.cell_volume
    lhs = np.sum(divergence_of_faces(g, w) * f) * vol
    grad = gradient_to_faces(g, f)
    lhs += (np.sum(w.x * grad.x) + np.sum(w.y * grad.y)) * vol
    boundary = (np.sum(w.x[-1, :] * f[-1, :]) - np.sum(w.x[0, :] * f[0, :])) * g.dy
    boundary += (np.sum(w.y[:, -1] * f[:, -1]) - np.sum(w.y[:, 0] * f[:, 0])) * g.dx
    assert lhs == pytest.approx(boundary, abs=1e-12)


def test_laplacian_annihilates_constants():
    g = Grid2D(6, 6)
    assert np.allclose(laplacian_neumann(g, np.full((6, 6), 4.2)), 0.0)


def test_laplacian_spike_stencil():
    # 3x3 grid with dx = dy = 1: unit spike gives -4 center, +1 neighbors
    g = Grid2D(3, 3, 3.0, 3.0)
    f = np.zeros((3, 3))
    f[1, 1] = 1.0
    lap = laplacian_neumann(g, f)
    assert lap[1, 1] == pytest.approx(-4.0)
    assert lap[0, 1] == lap[2, 1] == lap[1, 0] == lap[1, 2] == pytest.approx(1.0)


def test_laplacian_second_order_on_cosine():
    errs = []
    for n in (16, 32, 64):
        g = Grid2D(n, n)
        x, _ = g.cell_centers()
        f = np.cos(np.pi * x / g.lx)
        lap = laplacian_neumann(g, f)
        exact = -((np.pi / g.lx) ** 2) * f
        errs.append(np.max(np.abs(lap[2:-2, :] - exact[2:-2, :])))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.2)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.2)


def test_laplacian_symmetric_negative_semidefinite_mean_free(rng):
    g = Grid2D(9, 7, 1.1, 0.9)
    f = random_cell(g, rng)
    h = random_cell(g, rng)
    lf = laplacian_neumann(g, f)
    lh = laplacian_neumann(g, h)
    a = np.sum(lf * h)
    b = np.sum(f * lh)
    assert abs(a - b) <= 1e-12 * max(abs(a), 1.0)
    assert np.sum(lf * f) <= 1e-12
    assert abs(integrate_cells(g, lf)) <= 1e-12 * np.linalg.norm(f)


def test_integrate_constants():
    g = Grid2D(16, 16)
    assert integrate_cells(g, np.ones((16, 16))) == pytest.approx(1.0)
    g2 = Grid2D(10, 20, 2.0, 3.0)
    assert integrate_cells(g2, np.full((10, 20), 0.7)) == pytest.approx(0.7 * 6.0)


def test_integrate_sine_symmetry():
    g = Grid2D(32, 32)
    x, y = g.cell_centers()
    f = np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y)
    assert abs(integrate_cells(g, f)) < 1e-12


def test_boundary_flux_zero_velocity():
    g = Grid2D(8, 8)
    assert boundary_flux_integral(g, np.ones((8, 8)), face_zeros(g)) == 0.0


def test_boundary_flux_unit_outward_normal():
    g = Grid2D(8, 8)
    vel = face_zeros(g)
    vel.x[0, :] = -1.0   # outward on the left is -x
    vel.x[-1, :] = 1.0
    vel.y[:, 0] = -1.0
    vel.y[:, -1] = 1.0
    flux = boundary_flux_integral(g, np.ones((8, 8)), vel)
    assert flux == pytest.approx(4.0)


def test_boundary_flux_matches_advect_integral(rng):
    g = Grid2D(11, 9, 1.4, 0.8)
    phi = random_cell(g, rng)
    vel = random_face(g, rng)
    lhs = integrate_cells(g, advect_upwind(g, phi, vel))
    rhs = boundary_flux_integral(g, phi, vel)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_advect_zero_velocity():
    g = Grid2D(8, 8)
    phi = np.arange(64, dtype=float).reshape(8, 8)
    assert np.all(advect_upwind(g, phi, face_zeros(g)) == 0.0)


def test_advect_constant_preserved_by_divfree_velocity(rng):
    # div-free interior velocity with zero boundary normal velocity from a
    # node streamfunction vanishing on the boundary
    g = Grid2D(12, 10)
    psi = np.zeros((g.nx + 1, g.ny + 1))
    psi[1:-1, 1:-1] = rng.standard_normal((g.nx - 1, g.ny - 1))
    vel = FaceField((psi[:, 1:] - psi[:, :-1]) / g.dy,
                    -(psi[1:, :] - psi[:-1, :]) / g.dx)
    assert np.allclose(divergence_of_faces(g, vel), 0.0, atol=1e-12)
    out = advect_upwind(g, np.full((g.nx, g.ny), 2.5), vel)
    assert np.max(np.abs(out)) < 1e-12


def test_advect_step_profile_conserves_mass():
    g = Grid2D(16, 8)
    vel = face_zeros(g)
    vel.x[:, :] = 1.0
    x, _ = g.cell_centers()
    phi = np.where(x < 0.5, 1.0, 0.0)
    lhs = integrate_cells(g, advect_upwind(g, phi, vel))
    assert lhs == pytest.approx(boundary_flux_integral(g, phi, vel), abs=1e-13)


def test_operators_linear(rng):
    g = Grid2D(9, 8)
    f1, f2 = random_cell(g, rng), random_cell(g, rng)
    a, b = 1.7, -0.4
    for op in (lambda f: gradient_to_faces(g, f).x,
               lambda f: laplacian_neumann(g, f)):
        assert np.allclose(op(a * f1 + b * f2), a * op(f1) + b * op(f2),
                           atol=1e-12)
    w1, w2 = random_face(g, rng), random_face(g, rng)
    combo = FaceField(a * w1.x + b * w2.x, a * w1.y + b * w2.y)
    assert np.allclose(divergence_of_faces(g, combo),
                       a * divergence_of_faces(g, w1)
                       + b * divergence_of_faces(g, w2), atol=1e-12)


def test_boundary_pack_order():
    g = Grid2D(3, 4)
    packed = boundary_pack(g, 1.0, 2.0, 3.0, 4.0)
    assert packed.shape == (2 * (3 + 4),)
    assert np.all(packed[:3] == 1.0) and np.all(packed[3:7] == 2.0)
    assert np.all(packed[7:10] == 3.0) and np.all(packed[10:] == 4.0)
    lengths = boundary_face_lengths(g)
    assert lengths.sum() == pytest.approx(2 * (g.lx + g.ly))
