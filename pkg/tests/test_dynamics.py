import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edslab.billiard import config_geometry
from edslab.dynamics import (ConvexCurve, family_path, family_tangency, find_periodic, joachimsthal,
                             perimeter_gradient, reclose, reflect_step, reflection_defect,
                             richardson_check, tangency_residual, trajectory)
from edslab.errors import DomainError, InputError, SolverError

CIRCLE = ConvexCurve.circle(1.0)
ELLIPSE = ConvexCurve.ellipse(2.0, 1.0)


def test_curve_validation():
    with pytest.raises(InputError):
        ConvexCurve.ellipse(1.0, 2.0)
    with pytest.raises(InputError):
        ConvexCurve.circle(0.0)
    with pytest.raises(InputError):
        ConvexCurve(float("inf"), 1.0)
    assert CIRCLE.kind == "circle" and ELLIPSE.kind == "ellipse"
    t = 0.8
    assert ELLIPSE.parameter(ELLIPSE.point(t)) == pytest.approx(t)
    assert ELLIPSE.inward_normal(t) @ ELLIPSE.tangent(t) == pytest.approx(0.0, abs=1e-15)


def test_circle_reflection_keeps_equal_arcs():
    t0 = 0.3
    d = CIRCLE.point(t0 + 2.0) - CIRCLE.point(t0)
    ts, _ = trajectory(CIRCLE, t0, d, 6)
    arcs = np.mod(np.diff(ts), 2 * np.pi)
    assert np.allclose(arcs, 2.0, atol=1e-12)


def test_diameter_bounces_straight_back():
    t2, d2 = reflect_step(CIRCLE, 0.0, np.array([-1.0, 0.0]))
    assert abs(math.cos(t2) + 1) < 1e-15
    assert np.allclose(d2, [1.0, 0.0])


def test_joachimsthal_conserved():
    d = ELLIPSE.point(2.1) - ELLIPSE.point(0.2)
    ts, ds = trajectory(ELLIPSE, 0.2, d, 100)
    vals = [joachimsthal(ELLIPSE, t, dd) for t, dd in zip(ts, ds)]
    assert max(vals) - min(vals) < 1e-9


def test_reflect_step_rejects_outward_and_tangential():
    with pytest.raises(InputError):
        reflect_step(CIRCLE, 0.0, CIRCLE.tangent(0.0))
    with pytest.raises(InputError):
        reflect_step(CIRCLE, 0.0, np.array([1.0, 0.0]))
    with pytest.raises(InputError):
        reflect_step(CIRCLE, 0.0, np.zeros(2))


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(-1.4, 1.4), st.floats(1.0, 3.0))
def test_reflection_preserves_unit_speed_and_reverses(t, angle, a):
    curve = ConvexCurve.ellipse(a, 1.0)
    nu = curve.inward_normal(t)
    rot = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    d = rot @ nu
    t2, d2 = reflect_step(curve, t, d)
    assert abs(np.linalg.norm(d2) - 1) < 1e-12
    # time reversal: shooting back along the incoming chord returns to t
    d_in = curve.point(t) - curve.point(t2)
    t3, _ = reflect_step(curve, t2, d_in)
    assert np.linalg.norm(curve.point(t3) - curve.point(t)) < 1e-9


def test_pentagram_in_circle():
    orbit = find_periodic(CIRCLE, 5, 2, t1=0.0)
    g = config_geometry(orbit.config())
    # a chord subtending 4 pi / 5 meets the circle at angle pi/2 - 2 pi / 5 to the normal
    assert np.allclose(np.abs(g.cos_alpha), math.cos(math.pi / 2 - 2 * math.pi / 5), atol=1e-12)
    assert orbit.closure_residual < 1e-12


@pytest.mark.parametrize("n,q", [(3, 1), (4, 1), (5, 2), (7, 3), (9, 4)])
def test_ellipse_periodic_orbits(n, q):
    orbit = find_periodic(ELLIPSE, n, q, seed=1)
    assert orbit.closure_residual < 1e-10
    assert orbit.simulated_drift < 1e-6
    assert np.max(np.abs(perimeter_gradient(ELLIPSE, orbit.t))) < 1e-9


def test_ellipse_triangle_returns():
    orbit = find_periodic(ELLIPSE, 3, 1, seed=0)
    ts, _ = trajectory(ELLIPSE, orbit.t[0], orbit.direction, 3)
    assert np.linalg.norm(ELLIPSE.point(ts[-1]) - ELLIPSE.point(ts[0])) < 1e-8


def test_periodic_input_errors():
    with pytest.raises(InputError):
        find_periodic(CIRCLE, 4, 2)
    with pytest.raises(InputError):
        find_periodic(CIRCLE, 4, 4)
    with pytest.raises(InputError):
        ConvexCurve(1.0, 2.0)


def test_reflection_defect_detects_non_orbits():
    t = np.array([0.0, 1.0, 3.0])
    assert reflection_defect(CIRCLE, t) > 0.1
    with pytest.raises(DomainError):
        perimeter_gradient(CIRCLE, np.array([0.0, 0.0, 1.0]))


def test_reclose_moves_the_first_vertex():
    orbit = find_periodic(ELLIPSE, 5, 2, seed=2)
    other = reclose(orbit, float(orbit.t[0]) + 0.05)
    assert other.t[0] == pytest.approx(np.mod(orbit.t[0] + 0.05, 2 * np.pi))
    assert other.closure_residual < 1e-10


def test_circle_family_tangency():
    orbit = find_periodic(CIRCLE, 5, 2, seed=0)
    assert family_tangency(CIRCLE, orbit) < 1e-6


@pytest.mark.parametrize("n,q", [(3, 1), (5, 2), (7, 3)])
def test_ellipse_family_tangency(n, q):
    orbit = find_periodic(ELLIPSE, n, q, seed=0)
    assert family_tangency(ELLIPSE, orbit) < 1e-5
    rich = richardson_check(family_path(orbit))
    assert rich.ok and abs(rich.ratio - 4.0) < 0.5


def test_moving_one_vertex_is_not_tangent():
    orbit = find_periodic(ELLIPSE, 5, 2, seed=0)
    base = orbit.config()
    generic = np.zeros_like(base)
    generic[:2] = [0.6, 0.8]

    assert tangency_residual(lambda s: base + s * generic, 1e-4) > 0.1
    # sliding z_1 along the boundary stays in ker(psi_1): the mirror is the boundary tangent
    t0 = orbit.t.copy()

    def slide(s):
        t = t0.copy()
        t[0] += s
        return ELLIPSE.point(t).reshape(-1)

    assert tangency_residual(slide, 1e-4) < 1e-8


def test_tangency_input_errors():
    orbit = find_periodic(CIRCLE, 3, 1, seed=0)
    with pytest.raises(InputError):
        family_tangency(ELLIPSE, orbit)
    with pytest.raises(InputError):
        tangency_residual(family_path(orbit), 0.0)
    with pytest.raises(DomainError):
        tangency_residual(lambda s: orbit.config(), 1e-3)


def test_circle_richardson_sits_at_floor():
    orbit = find_periodic(CIRCLE, 5, 2, seed=0)
    rich = richardson_check(family_path(orbit))
    assert rich.ok and rich.coarse < 1e-12


def test_orbit_solver_reports_failure():
    # a needle-thin ellipse with a single homotopy step cannot be continued
    thin = ConvexCurve.ellipse(50.0, 0.02)
    with pytest.raises(SolverError):
        find_periodic(thin, 7, 3, seed=0, homotopy_steps=1)
