import numpy as np
import pytest

from edslab.billiard import billiard_system
from edslab.chart import (Chart, FormField, constant_field, d_numeric, derivative_field,
                          derivative_residual, eval_at, field_from_coefficients)
from edslab.errors import DomainError, InputError
from edslab.exterior import AlternatingForm, dx
from edslab import systems


def test_chart_validation():
    with pytest.raises(InputError):
        Chart(())
    with pytest.raises(InputError):
        Chart(("x", "x"))
    c = Chart(("x", "y"))
    assert c.dim == 2 and c.index("y") == 1
    with pytest.raises(InputError):
        c.point([1.0, 2.0, 3.0])


def test_constant_field_value():
    c = Chart(("x1", "x2", "x3"))
    f = constant_field(c, dx(3, 0, 1), "vol12")
    assert eval_at(f, [5.0, -1.0, 2.0]).allclose(dx(3, 0, 1), atol=0.0)
    assert d_numeric(f, [0.3, 0.2, 0.1]).max_abs() < 1e-10
    assert derivative_residual(f, [0.3, 0.2, 0.1]) < 1e-12


def test_contact_form_read_off():
    jets = systems.jet_maps_system()
    p = np.zeros(8)
    p[4], p[5] = 2.0, 3.0  # p11, p12
    theta1 = eval_at(jets.generators[0], p)
    want = AlternatingForm.from_terms(8, 1, {(2,): 1.0, (0,): -2.0, (1,): -3.0})
    assert theta1.allclose(want, atol=0.0)


def test_square_coefficient_field(rng):
    c = Chart(("x1", "x2"))
    f = field_from_coefficients(c, 1, [((1,), lambda p: p[0] ** 2)])
    for _ in range(10):
        p = rng.uniform(-2, 2, size=2)
        got = d_numeric(f, p, h=1e-5)
        assert abs(got.coeff((0, 1)) - 2 * p[0]) < 1e-8


def test_jets_derivative_matches_display(rng):
    jets = systems.jet_maps_system()
    m = 8
    want = dx(m, 4, 0) * -1.0 - dx(m, 5, 1)
    for _ in range(5):
        p = rng.standard_normal(m)
        assert np.max(np.abs(d_numeric(jets.generators[0], p).coeffs - want.coeffs)) < 1e-8
        assert derivative_residual(jets.generators[0], p) < 1e-8


def _wavy_field():
    c = Chart(("x", "y", "z"))
    terms = [((1,), lambda p: np.sin(p[0]) * np.exp(p[2])), ((0, 2), lambda p: np.cos(p[1] * p[0]))]
    one = field_from_coefficients(c, 1, terms[:1])
    two = field_from_coefficients(c, 2, terms[1:])
    return c, one, two


def test_richardson_second_order():
    c, one, _ = _wavy_field()
    p = np.array([0.4, -0.3, 0.2])
    # exact: d(sin x e^z dy) = cos x e^z dx^dy - sin x e^z dy^dz
    exact = AlternatingForm.from_terms(3, 2, {(0, 1): np.cos(0.4) * np.exp(0.2), (1, 2): -np.sin(0.4) * np.exp(0.2)})
    r1 = np.max(np.abs(d_numeric(one, p, 1e-2).coeffs - exact.coeffs))
    r2 = np.max(np.abs(d_numeric(one, p, 5e-3).coeffs - exact.coeffs))
    assert r1 / r2 == pytest.approx(4.0, rel=0.05)


def test_d_squared_vanishes(rng):
    _, one, two = _wavy_field()
    for field in (one, two):
        dd = FormField(field.chart, field.degree + 1, lambda p, f=field: d_numeric(f, p, 1e-4))
        for _ in range(5):
            p = rng.uniform(-1, 1, size=3)
            assert d_numeric(dd, p, 1e-3).max_abs() < 1e-4


def test_derivative_field_prefers_analytic():
    jets = systems.jet_maps_system()
    df = derivative_field(jets.generators[0])
    assert df.evaluator is jets.generators[0].derivative
    _, one, _ = _wavy_field()
    assert derivative_field(one).degree == 2


@pytest.mark.parametrize("build", [systems.jet_maps_system, systems.cauchy_riemann_system,
                                   lambda: systems.lagrangian_system(3),
                                   lambda: systems.special_lagrangian_system(3),
                                   systems.associative_system])
def test_analytic_derivatives_at_many_points(build):
    eds = build()
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        p = eds.sample_point(rng)
        for g in eds.generators:
            worst = max(worst, derivative_residual(g, p))
    assert worst < 1e-7


def test_evaluator_failure_is_domain_error():
    c = Chart(("x",))
    f = FormField(c, 1, lambda p: AlternatingForm(1, 1, np.array([1.0 / float(p[0])])))
    with pytest.raises(DomainError):
        eval_at(f, [0.0])
    bad = FormField(c, 1, lambda p: AlternatingForm(1, 1, np.array([np.inf])))
    with pytest.raises(DomainError):
        eval_at(bad, [1.0])
    wrong = FormField(c, 1, lambda p: AlternatingForm.scalar(1, 1.0))
    with pytest.raises(DomainError):
        eval_at(wrong, [1.0])
    with pytest.raises(InputError):
        d_numeric(f, [1.0], h=0.0)


def test_billiard_psi_at_square():
    eds = billiard_system(4)
    square = np.array([0, 0, 1, 0, 1, 1, 0, 1], dtype=float)
    psi1 = eval_at(eds.generators[0], square)
    # at z1 = (0,0): N1 = (-1, 0) - (0, -1) = (-1, 1), so Jn1 = (-1, -1)/sqrt2
    want = AlternatingForm.from_terms(8, 1, {(0,): -2 ** -0.5, (1,): -2 ** -0.5})
    assert psi1.allclose(want, atol=1e-15)
