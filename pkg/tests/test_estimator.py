import numpy as np
import pytest

from hkreg.estimator import error_fields, evaluate, prolongate, solve_fine
from hkreg.fem import assemble_stiffness, discrete_state
from hkreg.mesh import build_structured_mesh, refine_uniform, tag_boundary
from hkreg.problems import PROBLEM_A, PROBLEM_B

from conftest import random_layout, refined


def checkerboard(mesh):
    """Solid on cells whose (i + j) is even, keyed by barycenter position."""
    n = int(round(np.sqrt(mesh.n_elements / 2)))
    c = mesh.barycenters
    i = np.floor(c[:, 0] * n).astype(int)
    j = np.floor(c[:, 1] * n).astype(int)
    return np.where((i + j) % 2 == 0, 1.0, 1e-3)


def solid_block(mesh):
    """Solid on the lower half of the square (same volume as the checkerboard)."""
    return np.where(mesh.barycenters[:, 1] < 0.5, 1.0, 1e-3)


def test_prolongate_linear_function():
    rm = refined(3, 4, "left")
    u = 2.0 - 0.5 * rm.coarse.vertices[:, 0] + 3.0 * rm.coarse.vertices[:, 1]
    expect = 2.0 - 0.5 * rm.fine.vertices[:, 0] + 3.0 * rm.fine.vertices[:, 1]
    np.testing.assert_allclose(prolongate(u, rm), expect, rtol=0, atol=1e-14)


def test_prolongate_zero():
    rm = refined(2)
    np.testing.assert_array_equal(prolongate(np.zeros(rm.coarse.n_vertices), rm), 0.0)


def test_prolongation_preserves_energy(rng):
    rm = refined(4, 3, "alternating")
    w = random_layout(rng, rm.coarse.n_elements)
    u = rng.standard_normal(rm.coarse.n_vertices)
    K = assemble_stiffness(rm.coarse, w).csr
    M = assemble_stiffness(rm.fine, w[rm.parent_of]).csr
    Pu = prolongate(u, rm)
    assert Pu @ (M @ Pu) == pytest.approx(u @ (K @ u), rel=1e-12)


def test_transpose_operators(rng):
    rm = refined(3, 2, "right")
    u = rng.standard_normal(rm.coarse.n_vertices)
    v = rng.standard_normal(rm.fine.n_vertices)
    assert rm.prolongate(u) @ v == pytest.approx(u @ rm.prolongate_transpose(v), rel=1e-13)
    assert rm.restrict(v) @ u == pytest.approx(v @ rm.restrict_transpose(u), rel=1e-13)
    np.testing.assert_array_equal(rm.restrict(rm.prolongate(u)), u)


def test_fine_compliance_dominates_coarse():
    rm = refined(6)
    w = np.ones(rm.coarse.n_elements)
    coarse = discrete_state(rm.coarse, w, tol=1e-12)
    fine = solve_fine(rm, w, PROBLEM_B, tol=1e-12)
    assert fine.F >= coarse.F


def test_fine_solution_scales_with_filler():
    rm = refined(5)
    n = rm.coarse.n_elements
    solid = solve_fine(rm, np.ones(n), PROBLEM_B, tol=1e-13).u
    filler = solve_fine(rm, np.full(n, 1e-3), PROBLEM_B, tol=1e-13).u
    np.testing.assert_allclose(filler, solid / 1e-3, rtol=1e-9, atol=1e-12)


def test_checkerboard_is_underestimated_more_than_solid():
    rm = refined(2, pattern="right")
    gaps = {}
    for name, layout in (("checker", checkerboard(rm.coarse)), ("solid", np.ones(rm.coarse.n_elements))):
        ev = evaluate(rm, layout, PROBLEM_B, tol=1e-13)
        gaps[name] = ev.fine.F - ev.coarse.F
    assert gaps["checker"] > 0
    assert gaps["checker"] > gaps["solid"]


def test_theta_zero_for_nested_solution(rng):
    rm = refined(3)
    u = rng.standard_normal(rm.coarse.n_vertices)
    est = error_fields(u, prolongate(u, rm), rm)
    assert est.theta == 0.0
    np.testing.assert_array_equal(est.e_coarse, 0.0)


def test_theta_vanishes_for_linear_solution():
    rm = refined(3, 3, "alternating")
    u = 1.0 + rm.coarse.vertices[:, 0] - 2.0 * rm.coarse.vertices[:, 1]
    u_fine = 1.0 + rm.fine.vertices[:, 0] - 2.0 * rm.fine.vertices[:, 1]
    assert error_fields(u, u_fine, rm).theta <= 1e-20
    assert error_fields(u, u_fine, rm, "coarse").theta <= 1e-20


@pytest.mark.parametrize("pattern", ["right", "left", "alternating"])
def test_checkerboard_has_larger_error_than_solid(pattern):
    rm = refined(4, pattern=pattern)
    cb = evaluate(rm, checkerboard(rm.coarse), PROBLEM_B, tol=1e-13)
    solid = evaluate(rm, np.ones(rm.coarse.n_elements), PROBLEM_B, tol=1e-13)
    blk = evaluate(rm, solid_block(rm.coarse), PROBLEM_B, tol=1e-13)
    assert cb.theta > solid.theta
    # at equal volume the comparison is made scale free: theta grows like F squared
    assert cb.theta / cb.F**2 > 10 * blk.theta / blk.F**2


def test_error_fields_consistent(rng, problem):
    rm = refined(5, problem=problem)
    ev = evaluate(rm, random_layout(rng, rm.coarse.n_elements), problem)
    e = ev.error
    assert e.theta >= 0
    np.testing.assert_array_equal(e.e_coarse, e.e_fine[rm.coarse_vertex_in_fine])
    assert np.all(e.e_fine[rm.fine.dirichlet_mask] == 0.0)
    assert np.all(e.e_coarse[rm.coarse.dirichlet_mask] == 0.0)
    assert e.theta == pytest.approx(e.e_fine @ e.e_fine)


def test_theta_decreases_under_refinement():
    thetas = []
    for n in (16, 32):
        rm = refine_uniform(tag_boundary(build_structured_mesh(n, n, "alternating"), PROBLEM_B))
        thetas.append(evaluate(rm, np.ones(rm.coarse.n_elements), PROBLEM_B, tol=1e-12).theta)
    assert thetas[1] / thetas[0] < 1


@pytest.mark.parametrize("alpha", [0.0, 1.0, 1e5])
def test_regularized_functional_bounds_plain(alpha, rng):
    rm = refined(4, problem=PROBLEM_A)
    ev = evaluate(rm, random_layout(rng, rm.coarse.n_elements), PROBLEM_A)
    assert ev.regularized(alpha) >= ev.F


def test_unknown_error_field():
    rm = refined(2)
    with pytest.raises(ValueError):
        error_fields(np.zeros(rm.coarse.n_vertices), np.zeros(rm.fine.n_vertices), rm, "middle")
