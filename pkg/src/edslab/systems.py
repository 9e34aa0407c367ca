"""Built-in exterior differential systems and the octonion algebra.

Octonion convention: basis (1, e1..e7) with e_i e_j = e_k cyclically on the
Fano-plane triples in ``FANO_TRIPLES``.  Every associative-form value is
derived from this table.
"""
from __future__ import annotations

import itertools
import math
from typing import Callable

import numpy as np

from edslab.chart import Chart, FormField, constant_field, d_numeric
from edslab.eds import ExteriorSystem
from edslab.errors import InputError
from edslab.exterior import AlternatingForm, dx, evaluate, multi_indices, wedge

FANO_TRIPLES = ((1, 2, 3), (1, 4, 5), (1, 7, 6), (2, 4, 6), (2, 5, 7), (3, 4, 7), (3, 6, 5))


def _structure_constants() -> np.ndarray:
    c = np.zeros((8, 8, 8))
    c[0, :, :] = np.eye(8)
    c[:, 0, :] = np.eye(8)
    for i in range(1, 8):
        c[i, i, 0] = -1.0
    for a, b, d in FANO_TRIPLES:
        for x, y, z in ((a, b, d), (b, d, a), (d, a, b)):
            c[x, y, z] = 1.0
            c[y, x, z] = -1.0
    return c


OCT = _structure_constants()


def oct_mul(a, b) -> np.ndarray:
    """Octonion product of two 8-component arrays."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape[-1] != 8 or b.shape[-1] != 8:
        raise InputError("octonions have 8 components")
    return np.einsum("...i,...j,ijk->...k", a, b, OCT)


def oct_unit(i: int) -> np.ndarray:
    e = np.zeros(8)
    e[i] = 1.0
    return e


def _imaginary(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] == 7:
        return np.concatenate([np.zeros(x.shape[:-1] + (1,)), x], axis=-1)
    if x.shape[-1] == 8:
        if np.any(np.abs(x[..., 0]) > 1e-12):
            raise InputError("expected a purely imaginary octonion")
        return x
    raise InputError("imaginary octonions have 7 (or 8 with zero real part) components")


def associative_form(x, y, z) -> float:
    """phi(x, y, z) = <x, yz> on imaginary octonions."""
    x, y, z = _imaginary(x), _imaginary(y), _imaginary(z)
    return float(x @ oct_mul(y, z))


def associative_complement(x, y, z) -> np.ndarray:
    """The 7 imaginary components of (1/2) Im((xy)z - (zy)x)."""
    x, y, z = _imaginary(x), _imaginary(y), _imaginary(z)
    val = 0.5 * (oct_mul(oct_mul(x, y), z) - oct_mul(oct_mul(z, y), x))
    return val[1:]


def _alternating_part(trilinear: Callable, dim: int, width: int) -> np.ndarray:
    """Coefficients (width, C(dim,3)) of the alternating part of a trilinear map."""
    eye = np.eye(dim)
    rows = multi_indices(dim, 3)
    out = np.zeros((width, rows.shape[0]))
    for pos, (i, j, k) in enumerate(rows):
        acc = np.zeros(width)
        for perm in itertools.permutations(range(3)):
            inv = sum(1 for a in range(3) for b in range(a + 1, 3) if perm[a] > perm[b])
            args = [eye[(i, j, k)[t]] for t in perm]
            acc += (-1) ** inv * np.atleast_1d(trilinear(*args))
        out[:, pos] = acc / 6.0
    return out


def associative_3form() -> AlternatingForm:
    return AlternatingForm(7, 3, _alternating_part(associative_form, 7, 1)[0])


def coassociative_components() -> list:
    """The 7 constant 3-forms obtained by antisymmetrizing the complement."""
    coeffs = _alternating_part(associative_complement, 7, 7)
    return [AlternatingForm(7, 3, row) for row in coeffs]


def complement_alternation_defect() -> float:
    """max |raw - antisymmetrized| of the complement on basis triples."""
    eye = np.eye(7)
    comps = coassociative_components()
    worst = 0.0
    for i, j, k in itertools.permutations(range(7), 3):
        raw = associative_complement(eye[i], eye[j], eye[k])
        alt = np.array([evaluate(f, [eye[i], eye[j], eye[k]]) for f in comps])
        worst = max(worst, float(np.max(np.abs(raw - alt))))
    return worst


# ---------------------------------------------------------------- samplers


def _normal_point(dim: int, scale: float = 1.0):
    return lambda rng: scale * rng.standard_normal(dim)


# ---------------------------------------------------------------- jets


def _jet_chart(prefix_p: tuple) -> Chart:
    return Chart(("x1", "x2", "u1", "u2") + prefix_p)


def jet_maps_system() -> ExteriorSystem:
    """One-jets of maps R^2 -> R^2 with the contact forms theta^1, theta^2."""
    chart = _jet_chart(("p11", "p12", "p21", "p22"))
    m = chart.dim
    gens = []
    for a in (1, 2):
        ua = chart.index(f"u{a}")
        pa1, pa2 = chart.index(f"p{a}1"), chart.index(f"p{a}2")

        def theta(p, ua=ua, pa1=pa1, pa2=pa2):
            c = np.zeros(m)
            c[ua] = 1.0
            c[0] = -p[pa1]
            c[1] = -p[pa2]
            return AlternatingForm(m, 1, c)

        dtheta = -dx(m, pa1, 0) - dx(m, pa2, 1)
        gens.append(FormField(chart, 1, theta, derivative=lambda p, f=dtheta: f, name=f"theta{a}"))
    indep = [constant_field(chart, dx(m, 0), "dx1"), constant_field(chart, dx(m, 1), "dx2")]
    return ExteriorSystem("jets", chart, gens, n=2, independence=indep, sample_point=_normal_point(m))


def cauchy_riemann_system() -> ExteriorSystem:
    """The jet system restricted to p11 = p22, p12 = -p21 (coordinates p21, p22 eliminated)."""
    chart = _jet_chart(("p11", "p12"))
    m = chart.dim
    i11, i12 = chart.index("p11"), chart.index("p12")

    def theta1(p):
        return AlternatingForm.from_terms(m, 1, {(2,): 1.0, (0,): -p[i11], (1,): -p[i12]})

    def theta2(p):
        # du2 - p21 dx1 - p22 dx2 with p21 = -p12, p22 = p11
        return AlternatingForm.from_terms(m, 1, {(3,): 1.0, (0,): p[i12], (1,): -p[i11]})

    d1 = -dx(m, i11, 0) - dx(m, i12, 1)
    d2 = dx(m, i12, 0) - dx(m, i11, 1)
    gens = [
        FormField(chart, 1, theta1, derivative=lambda p: d1, name="theta1"),
        FormField(chart, 1, theta2, derivative=lambda p: d2, name="theta2"),
    ]
    indep = [constant_field(chart, dx(m, 0), "dx1"), constant_field(chart, dx(m, 1), "dx2")]
    return ExteriorSystem("cauchy-riemann", chart, gens, n=2, independence=indep,
                          sample_point=_normal_point(m))


# ---------------------------------------------------------------- symplectic / calibrated


def _cn_chart(n: int) -> Chart:
    return Chart(tuple(f"x{i}" for i in range(1, n + 1)) + tuple(f"y{i}" for i in range(1, n + 1)))


def symplectic_form(n: int) -> AlternatingForm:
    m = 2 * n
    omega = AlternatingForm.zero(m, 2)
    for i in range(n):
        omega = omega + dx(m, i, n + i)
    return omega


def holomorphic_volume(n: int) -> tuple[AlternatingForm, AlternatingForm]:
    """Real and imaginary parts of dz^1 ^ ... ^ dz^n with z = x + iy."""
    m = 2 * n
    re, im = dx(m, 0), dx(m, n)
    for j in range(1, n):
        ddx, ddy = dx(m, j), dx(m, n + j)
        re, im = wedge(re, ddx) - wedge(im, ddy), wedge(re, ddy) + wedge(im, ddx)
    return re, im


def lagrangian_system(n: int) -> ExteriorSystem:
    if n < 1:
        raise InputError("n must be positive")
    chart = _cn_chart(n)
    m = chart.dim
    gens = [constant_field(chart, symplectic_form(n), "omega")]
    indep = [constant_field(chart, dx(m, i), f"dx{i + 1}") for i in range(n)]
    return ExteriorSystem(f"lagrangian(n={n})", chart, gens, n=n, independence=indep,
                          sample_point=_normal_point(m))


def special_lagrangian_system(n: int) -> ExteriorSystem:
    if n < 2:
        raise InputError("special Lagrangian system needs n >= 2")
    chart = _cn_chart(n)
    m = chart.dim
    _, alpha_c = holomorphic_volume(n)
    gens = [constant_field(chart, symplectic_form(n), "omega"), constant_field(chart, alpha_c, "alpha_c")]
    indep = [constant_field(chart, dx(m, i), f"dx{i + 1}") for i in range(n)]
    return ExteriorSystem(f"special-lagrangian(n={n})", chart, gens, n=n, independence=indep,
                          sample_point=_normal_point(m))


def associative_system() -> ExteriorSystem:
    chart = Chart(tuple(f"e{i}" for i in range(1, 8)))
    gens = [constant_field(chart, f, f"phi_c[{i + 1}]") for i, f in enumerate(coassociative_components())]
    return ExteriorSystem("associative", chart, gens, n=3, sample_point=_normal_point(7))


def random_lagrangian_plane(n: int, rng: np.random.Generator) -> np.ndarray:
    """Orthonormal basis (2n, n) of U.R^n for a Haar-random unitary U."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return np.vstack([q.real, q.imag])


def random_orthonormal(m: int, k: int, rng: np.random.Generator) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((m, k)))
    return q


# ---------------------------------------------------------------- Frobenius


def frobenius_check(A: Callable, B: Callable, p, h: float = 1e-5) -> tuple[float, float]:
    """Residuals of the compatibility condition A_y + B A_u = B_x + A B_u.

    Returns ``(residual_hidden, residual_ideal)``: the first from finite
    differences of A and B, the second the single coefficient of
    d(theta) ^ theta for theta = du - A dx - B dy on (x, y, u).
    """
    p = np.asarray(p, dtype=np.float64)
    chart = Chart(("x", "y", "u"))

    def partial(f, k):
        e = np.zeros(3)
        e[k] = h
        return (f(*(p + e)) - f(*(p - e))) / (2 * h)

    a, b = A(*p), B(*p)
    hidden = partial(A, 1) + b * partial(A, 2) - partial(B, 0) - a * partial(B, 2)

    theta = FormField(chart, 1, lambda q: AlternatingForm(3, 1, [-A(*q), -B(*q), 1.0]), name="theta")
    top = wedge(d_numeric(theta, p, h), theta(p))
    return abs(float(hidden)), abs(float(top.coeffs[0]))
