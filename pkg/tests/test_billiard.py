import math

import numpy as np
import pytest

from edslab.billiard import (billiard_system, chain_coefficients, coframe_matrix, config_geometry,
                             consecutive_minors, dpsi_forms, dual_frame, edge_products,
                             family_constraint_rank, force_cascade, general_family_member,
                             genericity_propagation, integral_family, is_admissible,
                             no_3d_integral_elements, random_admissible, structure_residual,
                             structure_residual_unrestricted, triangle_obstruction,
                             triangle_points, triangle_system, unique_element, z_operator, z_vector)
from edslab.eds import find_integral_elements, integral_residual, polar_space
from edslab.errors import DomainError, InputError, PreconditionError
from edslab.exterior import evaluate
from edslab.linalg import numerical_rank

SQUARE = np.array([1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0])


def rotate(p, angle, shift):
    rot = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    return (p.reshape(-1, 2) @ rot.T + shift).reshape(-1)


def perimeter_grad(p):
    """Oracle: gradient of the closed polygon's perimeter w.r.t. each vertex."""
    z = p.reshape(-1, 2)
    out = []
    for i in range(len(z)):
        a, b = z[i] - z[i - 1], z[i] - z[(i + 1) % len(z)]
        out.append(a / np.linalg.norm(a) + b / np.linalg.norm(b))
    return np.array(out)


def test_square_geometry():
    g = config_geometry(SQUARE)
    assert np.allclose(g.lengths, math.sqrt(2))
    assert np.allclose(np.abs(g.cos_alpha), 1 / math.sqrt(2))
    assert np.allclose(g.a, g.cos_alpha / (2 * math.sqrt(2)))


def test_config_errors():
    with pytest.raises(InputError):
        config_geometry(np.zeros((2, 2)))
    with pytest.raises(InputError):
        config_geometry(np.array([0.0, np.nan, 1, 0, 0, 1]))
    with pytest.raises(DomainError):
        config_geometry(np.array([0.0, 0, 0, 0, 1, 1]))
    # collinear: the middle point reflects straight back
    assert not is_admissible(np.array([0.0, 0, 1, 0, 2, 0]))
    assert is_admissible(SQUARE)


def test_psi_is_normal_to_mirror(rng):
    """psi_i is the displacement of z_i across the mirror through z_i; the
    mirror's normal is the perimeter gradient at z_i."""
    for n in (3, 5, 8):
        p = random_admissible(n, rng)
        g = config_geometry(p)
        grad = perimeter_grad(p)
        cross = g.normals[:, 0] * grad[:, 1] - g.normals[:, 1] * grad[:, 0]
        assert np.max(np.abs(cross)) < 1e-12
        assert np.allclose(np.einsum("ij,ij->i", g.tangents, g.normals), 0, atol=1e-15)
        # |cos alpha| is the cosine of the incidence angle against the mirror normal
        inc = g.points - np.roll(g.points, 1, axis=0)
        inc /= np.linalg.norm(inc, axis=1)[:, None]
        unit_grad = grad / np.linalg.norm(grad, axis=1)[:, None]
        assert np.allclose(np.abs(g.cos_alpha), np.abs(np.einsum("ij,ij->i", inc, unit_grad)), atol=1e-12)


def test_rigid_motion_and_scaling_invariance(rng):
    p = random_admissible(6, rng)
    g = config_geometry(p)
    moved = config_geometry(rotate(p, 0.7, np.array([3.0, -2.0])))
    assert np.allclose(moved.cos_alpha, g.cos_alpha, atol=1e-12)
    assert np.allclose(moved.lengths, g.lengths, atol=1e-12)
    scaled = config_geometry(2.5 * p)
    assert np.allclose(scaled.lengths, 2.5 * g.lengths)
    assert np.allclose(scaled.a, g.a / 2.5) and np.allclose(scaled.b, g.b / 2.5)


def test_coframe_and_dual_frame(rng):
    for n in (3, 4, 7):
        p = random_admissible(n, rng)
        cof = coframe_matrix(p)
        assert numerical_rank(cof).rank == 2 * n
        x = dual_frame(p)
        assert np.allclose(cof @ x, np.vstack([np.eye(n), np.zeros((n, n))]), atol=1e-12)


def test_z_is_in_no_integral_plane(rng):
    """Z = X_1 + ... + X_n: its polar space is span(Z) alone, so c1(Z) = 2n - 1."""
    for n in range(3, 9):
        eds = billiard_system(n)
        p = random_admissible(n, rng)
        z = z_vector(p)
        op = z_operator(p)
        # oracle: closed-form operator agrees with numeric d psi_j(Z, X_k)
        x = dual_frame(p)
        numeric = np.array([[evaluate(f, [z, x[:, k]]) for k in range(n)] for f in dpsi_forms(eds, p)])
        assert np.max(np.abs(numeric - op)) < 1e-6 * np.max(np.abs(op))
        rank = numerical_rank(op).rank
        assert rank == n - 1
        assert polar_space(eds, p, z[:, None]).c == 2 * n - (n - rank)


@pytest.mark.xfail(strict=True, reason="Z has a one-dimensional polar space; c1(Z) = 2n - 1")
def test_z_polar_equations_count_is_2n_minus_2():
    eds = billiard_system(5)
    p = random_admissible(5, np.random.default_rng(3))
    assert polar_space(eds, p, z_vector(p)[:, None]).c == 2 * 5 - 2


def test_generic_vector_has_2n_minus_2_polar_equations(rng):
    for n in range(4, 9):
        eds = billiard_system(n)
        p = random_admissible(n, rng)
        member = general_family_member(eds, p, rng)
        v = member.basis @ rng.standard_normal(2)
        assert polar_space(eds, p, v[:, None]).c == 2 * n - 2


@pytest.mark.parametrize("n", [3, 4, 5, 6, 8])
def test_structure_equation(n, rng):
    eds = billiard_system(n)
    for _ in range(3):
        p = random_admissible(n, rng)
        assert structure_residual(eds, p) < 1e-8
        assert structure_residual_unrestricted(eds, p) > 1e-3


def test_structure_equation_on_square():
    assert structure_residual(billiard_system(4), SQUARE) < 1e-8


def test_chain_coefficients_match_closed_form(rng):
    eds = billiard_system(6)
    p = random_admissible(6, rng)
    a, b = chain_coefficients(eds, p)
    g = config_geometry(p)
    assert np.allclose(a, g.a, rtol=1e-6)
    assert np.allclose(b, -g.b, rtol=1e-6)


def test_family_members_are_integral(rng):
    for n in (4, 5, 6, 7):
        eds = billiard_system(n)
        p = random_admissible(n, rng)
        for _ in range(5):
            member = integral_family(eds, p, rng.uniform(-1.5, 1.5, n - 3))
            assert integral_residual(eds, p, member.basis) < 1e-8
            assert np.max(np.abs(consecutive_minors(member.coords) - member.deltas)) < 1e-9
            assert member.chain_residual < 1e-9
            # chart normalization: v = X_1 + ..., w = X_2 + ...
            assert np.allclose(member.coords[:, :2], np.eye(2))


def test_last_coordinate_of_w(rng):
    """eta_n(w) = -a_1 / b_1 on every member."""
    for n in (4, 5, 6):
        eds = billiard_system(n)
        p = random_admissible(n, rng)
        g = config_geometry(p)
        member = general_family_member(eds, p, rng)
        assert member.coords[1, n - 1] == pytest.approx(-g.a[0] / g.b[0], rel=1e-6)


def test_family_errors(rng):
    eds3 = billiard_system(3)
    p3 = random_admissible(3, rng)
    with pytest.raises(InputError):
        integral_family(eds3, p3, [])
    eds = billiard_system(5)
    with pytest.raises(InputError):
        integral_family(eds, random_admissible(5, rng), [0.1])
    with pytest.raises(InputError):
        unique_element(eds, random_admissible(5, rng))


def test_family_dimension_and_constraint_rank(rng):
    for n in (4, 5, 6):
        eds = billiard_system(n)
        p = random_admissible(n, rng)
        assert family_constraint_rank(eds, p) == (n - 1, n)
        # 2(n-2) chart unknowns, n - 1 independent equations
        found = find_integral_elements(eds, p, seed=1, trials=6)
        assert found.local_dimension == 2 * (n - 2) - (n - 1) == n - 3


def test_genericity_propagates(rng):
    eds = billiard_system(5)
    p = random_admissible(5, rng)
    for _ in range(100):
        assert genericity_propagation(eds, p, general_family_member(eds, p, rng).basis)


def test_genericity_needs_integral_element(rng):
    eds = billiard_system(5)
    p = random_admissible(5, rng)
    x = dual_frame(p)
    with pytest.raises(PreconditionError):
        genericity_propagation(eds, p, x[:, :2] + 0.3 * np.eye(10)[:, 4:6])
    # eta_2 ^ eta_3 vanishes on span(X_1, X_2)
    prods = edge_products(p, x[:, :2])
    assert prods[1] < 1e-14 and prods[0] > 0.5


def test_unique_element_n3(rng):
    eds = billiard_system(3)
    p = random_admissible(3, rng)
    e = unique_element(eds, p)
    assert integral_residual(eds, p, e.basis) < 1e-8
    assert np.allclose(e.coords[:, 2], e.deltas[1:])
    found = find_integral_elements(eds, p, seed=2, trials=10)
    assert found.local_dimension == 0


def test_force_cascade_on_triangular_rows():
    rows = np.array([[1.0, 0.0, 0.0], [2.0, 3.0, 0.0], [0.0, 1.0, 1.0]])
    order, free = force_cascade(rows, ["r0", "r1", "r2"])
    assert [k for k, _ in order] == [0, 1, 2] and free == []
    order, free = force_cascade(np.array([[1.0, 1.0]]), ["r"])
    assert order == [] and free == [0, 1]


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
def test_no_3d_integral_elements(n, rng):
    eds = billiard_system(n)
    res = no_3d_integral_elements(eds, random_admissible(n, rng), seed=n, trials=60)
    assert res.verdict == "none"
    assert res.search_generic == 0
    if n > 3:
        assert all(not u for u in res.unforced)
        assert all(len(o) == n - 2 for o in res.forcing_order)


def test_no_3d_on_square():
    res = no_3d_integral_elements(billiard_system(4), SQUARE, seed=0, trials=60)
    assert res.verdict == "none"


def test_equilateral_triangle_obstruction():
    ob = triangle_obstruction(math.pi / 6, math.pi / 6, 1.0)
    assert ob.claimed == pytest.approx(1.5, abs=1e-12)
    assert ob.torsion == pytest.approx(1.5, abs=1e-4)
    c, s = math.cos(math.pi / 6), math.sin(math.pi / 6)
    assert 6 * c * c * s * s == pytest.approx(9 / 8)
    assert ob.theta_on_element < 1e-8


def test_triangle_sweep():
    rng = np.random.default_rng(7)
    for _ in range(100):
        a1, a2 = rng.uniform(0.1, 0.7, 2)
        if a1 + a2 > math.pi / 2 - 0.1:
            continue
        l1 = float(rng.uniform(0.5, 2.0))
        ob = triangle_obstruction(a1, a2, l1)
        assert abs(ob.torsion) > 1e-3
        assert ob.relative_error < 1e-5
        assert ob.theta_on_element < 1e-8


def test_triangle_points_close_up():
    p = triangle_points(0.4, 0.5, 1.3)
    g = config_geometry(p)
    assert g.lengths[0] == pytest.approx(1.3)
    assert np.allclose(np.sort(g.alpha), np.sort([0.4, 0.5, math.pi / 2 - 0.9]), atol=1e-12)
    with pytest.raises(InputError):
        triangle_points(0.8, 0.8, 1.0)
    with pytest.raises(InputError):
        triangle_points(0.3, 0.3, -1.0)


def test_augmented_triangle_system_is_empty():
    eds = triangle_system()
    p = triangle_points(0.4, 0.5, 1.0)
    found = find_integral_elements(eds, p, seed=0, trials=30)
    assert found.empty
