import numpy as np
import pytest

from chbrinkman import (FaceField, Grid2D, ModelParams, ModelSpec,
                        constant_viscosity, face_zeros, gradient_to_faces,
                        norm_l2_cells, solve_brinkman, solve_darcy,
                        viscous_dissipation, zero_sources)
from chbrinkman.flow import assemble_brinkman_system, shear_dissipation
from chbrinkman.harness import brinkman_manufactured, passthrough_sources
from conftest import dense_solve


def flow_spec(eta=0.5, lam=0.0, nu=1.0, sources=None):
    return ModelSpec(params=ModelParams(nu=nu),
                     viscosity=constant_viscosity(eta, lam),
                     sources=sources if sources is not None
                     else zero_sources(1.0))


def test_brinkman_zero_data_gives_zero_flow():
    g = Grid2D(12, 12)
    zero = np.zeros((12, 12))
    sol = solve_brinkman(g, zero, zero, zero, flow_spec())
    assert np.max(np.abs(sol.vel.x)) < 1e-12
    assert np.max(np.abs(sol.vel.y)) < 1e-12
    assert np.max(np.abs(sol.p)) < 1e-12
    assert sol.div_residual < 1e-12


def brinkman_mms_errors(n, eta=0.7, nu=1.0):
    g = Grid2D(n, n)
    vx_f, vy_f, p_f, gamma_f, fx_f, fy_f = brinkman_manufactured(eta, nu)
    spec = flow_spec(eta=eta, nu=nu, sources=passthrough_sources())
    xc, yc = g.cell_centers()
    xfx, yfx = g.xface_centers()
    xfy, yfy = g.yface_centers()
    zero = np.zeros((n, n))
    extra = FaceField(fx_f(xfx, yfx), fy_f(xfy, yfy))
    sol = solve_brinkman(g, gamma_f(xc, yc), zero, zero, spec,
                         extra_force=extra)
    v_err = FaceField(sol.vel.x - vx_f(xfx, yfx),
                      sol.vel.y - vy_f(xfy, yfy)).norm_l2(g)
    return v_err, sol


def test_brinkman_manufactured_velocity_order():
    e16, _ = brinkman_mms_errors(16)
    e32, _ = brinkman_mms_errors(32)
    assert np.log2(e16 / e32) >= 0.9


def test_brinkman_divergence_constraint():
    g = Grid2D(16, 16)
    _, sol = brinkman_mms_errors(16)
    vx_f, vy_f, p_f, gamma_f, fx_f, fy_f = brinkman_manufactured(0.7, 1.0)
    xc, yc = g.cell_centers()
    gnorm = norm_l2_cells(g, gamma_f(xc, yc))
    assert sol.div_residual <= 10.0 * 1e-9 * gnorm


def test_brinkman_system_symmetric(rng):
    g = Grid2D(8, 8)
    phi = rng.uniform(-1, 1, (8, 8))
    system, _ = assemble_brinkman_system(g, phi, flow_spec(0.3, 0.1),
                                         np.zeros((8, 8)), face_zeros(g))
    asym = abs(system.matrix - system.matrix.T).max()
    assert asym < 1e-12


def test_brinkman_velocity_block_positive_semidefinite(rng):
    g = Grid2D(8, 8)
    phi = rng.uniform(-1, 1, (8, 8))
    system, _ = assemble_brinkman_system(g, phi, flow_spec(0.3, 0.1),
                                         np.zeros((8, 8)), face_zeros(g))
    nv = (g.nx + 1) * g.ny + g.nx * (g.ny + 1)
    a_vv = system.matrix[:nv, :nv]
    for _ in range(5):
        v = rng.standard_normal(nv)
        assert v @ (a_vv @ v) >= -1e-10


def test_brinkman_rejects_fully_singular_assembly():
    g = Grid2D(8, 8)
    zero = np.zeros((8, 8))
    spec0 = ModelSpec(params=ModelParams(nu=0.0),
                      viscosity=constant_viscosity(0.0),
                      sources=zero_sources())
    with pytest.raises(ValueError, match="singular"):
        solve_brinkman(g, zero, zero, zero, spec0)


def test_darcy_zero_data():
    g = Grid2D(12, 12)
    zero = np.zeros((12, 12))
    sol = solve_darcy(g, zero, zero, zero, flow_spec())
    assert np.max(np.abs(sol.p)) < 1e-12
    assert np.max(np.abs(sol.vel.x)) < 1e-12


def torsion_series(x, y, terms=199):
    total = 0.0
    for k in range(1, terms, 2):
        total += (4.0 / (np.pi**3 * k**3)
                  * (1 - np.cosh(k * np.pi * (y - 0.5)) / np.cosh(k * np.pi / 2))
                  * np.sin(k * np.pi * x))
    return total


def test_darcy_torsion_center_value():
    # Gamma_v = 1, F = 0, nu = 1: p is the unit-square torsion solution
    g = Grid2D(64, 64)
    spec = flow_spec(sources=passthrough_sources())
    gamma = np.ones((64, 64))
    zero = np.zeros((64, 64))
    sol = solve_darcy(g, gamma, zero, zero, spec)
    center = 0.25 * (sol.p[31, 31] + sol.p[32, 31] + sol.p[31, 32]
                     + sol.p[32, 32])
    assert center == pytest.approx(torsion_series(0.5, 0.5), abs=2e-3)
    assert sol.div_residual < 1e-8


def test_darcy_matches_dense_lu_oracle(rng):
    from chbrinkman.flow import assemble_darcy_pressure_system

    g = Grid2D(8, 8)
    gamma = rng.standard_normal((8, 8))
    force = FaceField(rng.standard_normal((9, 8)), rng.standard_normal((8, 9)))
    system = assemble_darcy_pressure_system(g, gamma, 1.3, force)
    from chbrinkman import cg_solve
    x, stats = cg_solve(system.matrix, system.rhs, tol=1e-12)
    assert stats.converged
    x_lu = dense_solve(system.matrix, system.rhs)
    assert np.linalg.norm(x - x_lu) <= 1e-9 * np.linalg.norm(x_lu)


def test_darcy_gradient_identity_on_interior_faces(rng):
    # F = grad(q) makes v = (grad(q) - grad(p))/nu on interior faces exactly
    g = Grid2D(16, 16)
    nu = 2.0
    xc, yc = g.cell_centers()
    q = np.sin(2 * np.pi * xc) * yc**2
    force = gradient_to_faces(g, q)
    spec = ModelSpec(params=ModelParams(nu=nu), sources=zero_sources(1.0))
    zero = np.zeros((16, 16))
    sol = solve_darcy(g, zero, zero, zero, spec, extra_force=force)
    expected = gradient_to_faces(g, q - sol.p)
    assert np.allclose(sol.vel.x[1:-1, :], expected.x[1:-1, :] / nu,
                       atol=1e-9)
    assert np.allclose(sol.vel.y[:, 1:-1], expected.y[:, 1:-1] / nu,
                       atol=1e-9)


def test_viscous_dissipation_zero_velocity():
    g = Grid2D(8, 8)
    assert viscous_dissipation(g, face_zeros(g), np.zeros((8, 8)),
                               flow_spec()) == 0.0


def test_viscous_dissipation_rigid_translation():
    g = Grid2D(16, 16)
    vel = face_zeros(g)
    vel.x[:, :] = 1.0
    spec = flow_spec(eta=0.7, lam=0.3, nu=1.0)
    assert viscous_dissipation(g, vel, np.zeros((16, 16)), spec) == \
        pytest.approx(1.0, abs=1e-12)


def test_viscous_dissipation_pure_shear():
    # vx = y, vy = 0: Dv = [[0, 1/2], [1/2, 0]], 2*eta*|Dv|^2 = 1 pointwise
    g = Grid2D(32, 32)
    vel = face_zeros(g)
    _, yfx = g.xface_centers()
    vel.x[:, :] = yfx
    import dataclasses
    spec = dataclasses.replace(flow_spec(eta=1.0, lam=0.0),
                               params=dataclasses.replace(ModelParams(),
                                                          nu=0.0))
    total = viscous_dissipation(g, vel, np.zeros((32, 32)), spec)
    assert total == pytest.approx(1.0, abs=1e-3)


def test_brinkman_darcy_degeneracy_direction():
    # lowering (eta, lam) monotonically closes the gap to the Darcy solve
    import dataclasses
    g = Grid2D(32, 32)
    xc, yc = g.cell_centers()
    phi = np.tanh((0.25 - np.sqrt((xc - 0.5) ** 2 + (yc - 0.5) ** 2)) / 0.1)
    mu = np.sin(np.pi * xc) * np.cos(np.pi * yc)
    sigma = 0.5 + 0.25 * np.cos(np.pi * xc)
    from chbrinkman.model import SourceSpec, smooth_blend
    spec = ModelSpec(params=ModelParams(nu=1.0, chi=0.5),
                     viscosity=constant_viscosity(0.02, 0.01),
                     sources=SourceSpec(
                         b_v=smooth_blend(0.0, 0.2),
                         f_v=smooth_blend(-0.05, 0.05),
                         b_phi=smooth_blend(0.0, 0.1),
                         f_phi=smooth_blend(0.0, 0.0),
                         h=smooth_blend(0.5, 1.0)))
    darcy = solve_darcy(g, phi, mu, sigma, spec)
    gaps = []
    for s in (1.0, 0.1, 0.01, 0.001):
        spec_s = dataclasses.replace(
            spec, viscosity=constant_viscosity(0.02 * s, 0.01 * s))
        sol = solve_brinkman(g, phi, mu, sigma, spec_s)
        gaps.append((sol.vel - darcy.vel).norm_l2(g))
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_shear_dissipation_nonnegative(rng):
    g = Grid2D(10, 10)
    vel = FaceField(rng.standard_normal((11, 10)),
                    rng.standard_normal((10, 11)))
    assert shear_dissipation(g, vel, np.zeros((10, 10)), flow_spec()) >= 0.0
