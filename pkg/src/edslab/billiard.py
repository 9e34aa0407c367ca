"""The billiard configuration space Sigma = (R^2)^n and its exterior system.

Coordinates are (x1, y1, ..., xn, yn).  Indices below are 0-based and
cyclic; ``j + 1`` and ``j - 1`` are taken mod n.

For a configuration p = (z_1, ..., z_n):

* n_i is the unit tangent N_i / |N_i| with
  N_i = (z_i - z_{i+1})/|z_i - z_{i+1}| - (z_i - z_{i-1})/|z_i - z_{i-1}|,
  and Jn_i its counterclockwise rotation by pi/2;
* psi_i = <Jn_i, dz_i>, eta_i = <n_i, dz_i>;
* cos(alpha_i) = <e_{i-1}, Jn_i> with e_{i-1} the unit edge z_{i-1} -> z_i
  (signed, so the structure equation holds for either orientation);
* l_i = |z_{i+1} - z_i|, a_i = cos(alpha_{i+1}) / (2 l_i),
  b_i = cos(alpha_{i-1}) / (2 l_{i-1}).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from edslab import kernels
from edslab.chart import Chart, FormField, d_numeric
from edslab.eds import (INTEGRAL_TOL, ExteriorSystem, find_integral_elements, integral_residual,
                        polar_space)  # noqa: F401  (re-exported for callers)
from edslab.errors import DomainError, InputError, NumericalInconsistencyError, PreconditionError
from edslab.exterior import AlternatingForm, as_columns, evaluate, restrict, wedge
from edslab.linalg import numerical_rank

COS_EPS = 1e-12
GENERIC_TOL = 1e-9
STEP_SCALE = 1e-6


@dataclass(frozen=True)
class BilliardConfig:
    points: np.ndarray  # (n, 2)
    tangents: np.ndarray  # n_i
    normals: np.ndarray  # Jn_i
    lengths: np.ndarray  # l_i = |z_{i+1} - z_i|
    cos_alpha: np.ndarray
    alpha: np.ndarray
    a: np.ndarray
    b: np.ndarray

    @property
    def n(self) -> int:
        return self.points.shape[0]


def config_geometry(points) -> BilliardConfig:
    """Derived billiard geometry; raises DomainError off the admissible set."""
    z = np.asarray(points, dtype=np.float64)
    if z.ndim == 1:
        z = z.reshape(-1, 2)
    if z.ndim != 2 or z.shape[1] != 2:
        raise InputError("points must be an (n, 2) array")
    n = z.shape[0]
    if n < 3:
        raise InputError("a billiard configuration needs n >= 3 points")
    if not np.all(np.isfinite(z)):
        raise InputError("points must be finite")
    try:
        t, jt = kernels.point_frames(z)
    except ValueError as exc:
        raise DomainError(f"inadmissible configuration: {exc}") from exc
    edge = np.roll(z, -1, axis=0) - z
    lengths = np.hypot(edge[:, 0], edge[:, 1])
    incoming = edge[np.arange(n) - 1] / lengths[np.arange(n) - 1][:, None]  # e_{i-1}
    cos_alpha = np.einsum("ij,ij->i", incoming, jt)
    if np.any(np.abs(cos_alpha) <= COS_EPS):
        raise DomainError("inadmissible configuration: some cos(alpha_j) vanishes")
    alpha = np.arccos(np.clip(cos_alpha, -1.0, 1.0))
    a = np.roll(cos_alpha, -1) / (2.0 * lengths)
    b = np.roll(cos_alpha, 1) / (2.0 * np.roll(lengths, 1))
    return BilliardConfig(z, t, jt, lengths, cos_alpha, alpha, a, b)


def is_admissible(p) -> bool:
    try:
        config_geometry(p)
    except (DomainError, InputError):
        return False
    return True


class _FrameCache:
    """Memoizes point_frames on exact point bytes; evaluators stay pure."""

    def __init__(self, n: int, maxsize: int = 4096):
        self.n = n
        self.maxsize = maxsize
        self._store: dict = {}

    def __call__(self, p: np.ndarray):
        key = p.tobytes()
        hit = self._store.get(key)
        if hit is None:
            try:
                hit = kernels.point_frames(p.reshape(self.n, 2))
            except ValueError as exc:
                raise DomainError(str(exc)) from exc
            if len(self._store) >= self.maxsize:
                self._store.clear()
            self._store[key] = hit
        return hit


def billiard_chart(n: int) -> Chart:
    labels = []
    for i in range(1, n + 1):
        labels += [f"x{i}", f"y{i}"]

    def step(p):
        z = p.reshape(-1, 2)
        diam = float(np.max(np.linalg.norm(z[:, None, :] - z[None, :, :], axis=-1)))
        return STEP_SCALE * max(diam, 1e-12)

    return Chart(tuple(labels), step_rule=step)


def _slot_form(m: int, i: int, vec: np.ndarray) -> AlternatingForm:
    c = np.zeros(m)
    c[2 * i: 2 * i + 2] = vec
    return AlternatingForm(m, 1, c)


def coframe_fields(n: int, chart: Optional[Chart] = None):
    """(eta_1..eta_n, psi_1..psi_n) as FormFields."""
    chart = chart or billiard_chart(n)
    m = 2 * n
    frames = _FrameCache(n)
    etas = [FormField(chart, 1, lambda p, i=i: _slot_form(m, i, frames(p)[0][i]), name=f"eta{i + 1}")
            for i in range(n)]
    psis = [FormField(chart, 1, lambda p, i=i: _slot_form(m, i, frames(p)[1][i]), name=f"psi{i + 1}")
            for i in range(n)]
    return etas, psis


def edge_products(p, basis) -> np.ndarray:
    """max |coefficient| of the restriction of each eta_i ^ eta_{i+1} to span(basis),
    on an orthonormalized basis."""
    cfg = config_geometry(p)
    n = cfg.n
    m = 2 * n
    q, _ = np.linalg.qr(as_columns(basis, m))
    out = np.empty(n)
    for i in range(n):
        form = wedge(_slot_form(m, i, cfg.tangents[i]), _slot_form(m, (i + 1) % n, cfg.tangents[(i + 1) % n]))
        out[i] = restrict(form, q).max_abs()
    return out


def billiard_system(n: int, genericity_tol: float = GENERIC_TOL, h: Optional[float] = None) -> ExteriorSystem:
    """The system generated by psi_1..psi_n with independence eta_1 ^ eta_2.

    ``h`` overrides the finite-difference step (default 1e-6 * diameter).
    """
    if n < 3:
        raise InputError("billiard system needs n >= 3")
    chart = billiard_chart(n)
    etas, psis = coframe_fields(n, chart)

    def generic(p, basis):
        return bool(np.all(edge_products(p, basis) > genericity_tol))

    def sample(rng):
        return random_admissible(n, rng)

    system = ExteriorSystem(
        f"billiard(n={n})", chart, psis, n=2, independence=etas[:2], genericity=generic,
        admissible=is_admissible, sample_point=sample, h=h,
    )
    system.sample_element = lambda p, rng: general_family_member(system, p, rng).basis
    system.etas = etas
    return system


def random_admissible(n: int, rng: np.random.Generator, jitter: float = 0.2,
                      min_cos: float = 0.05, max_tries: int = 1000) -> np.ndarray:
    """A perturbed regular n-gon (counterclockwise, unit circumradius)."""
    ang = 2.0 * np.pi * np.arange(n) / n
    base = np.column_stack([np.cos(ang), np.sin(ang)])
    for _ in range(max_tries):
        r = jitter * np.sqrt(rng.uniform(size=n))
        th = rng.uniform(0.0, 2.0 * np.pi, size=n)
        z = base + np.column_stack([r * np.cos(th), r * np.sin(th)])
        try:
            cfg = config_geometry(z)
        except DomainError:
            continue
        if np.min(np.abs(cfg.cos_alpha)) > min_cos:
            return z.reshape(-1)
    raise DomainError("could not sample an admissible configuration")


# ---------------------------------------------------------------- frames


def coframe_matrix(p) -> np.ndarray:
    """Rows eta_1..eta_n, psi_1..psi_n at p (2n x 2n)."""
    cfg = config_geometry(p)
    n = cfg.n
    m = 2 * n
    rows = np.zeros((m, m))
    for i in range(n):
        rows[i, 2 * i: 2 * i + 2] = cfg.tangents[i]
        rows[n + i, 2 * i: 2 * i + 2] = cfg.normals[i]
    return rows


def dual_frame(p) -> np.ndarray:
    """Columns X_1..X_n with eta_j(X_i) = delta_ij and psi_j(X_i) = 0."""
    c = coframe_matrix(p)
    n = c.shape[0] // 2
    info = numerical_rank(c, 1e-12)
    if info.rank < c.shape[0]:
        raise NumericalInconsistencyError("coframe (eta, psi) is singular at this point")
    rhs = np.zeros((c.shape[0], n))
    rhs[:n, :] = np.eye(n)
    return np.linalg.solve(c, rhs)


def z_vector(p) -> np.ndarray:
    """Z = X_1 + ... + X_n."""
    return dual_frame(p).sum(axis=1)


def z_operator(p) -> np.ndarray:
    """The n x n matrix of u -> d psi_j(Z, u) on ker(psi) in the frame X, from
    the structure equation: row j has a_j + b_j at j, -a_j at j+1, -b_j at j-1."""
    cfg = config_geometry(p)
    n = cfg.n
    mat = np.zeros((n, n))
    for j in range(n):
        mat[j, j] += cfg.a[j] + cfg.b[j]
        mat[j, (j + 1) % n] -= cfg.a[j]
        mat[j, (j - 1) % n] -= cfg.b[j]
    return mat


# ---------------------------------------------------------------- structure equation


def dpsi_forms(sys: ExteriorSystem, p) -> list:
    """Numeric d(psi_j) at p, in generator order."""
    return [d_numeric(g, p, sys.h) for g in sys.generators]


def dpsi_on_frame(sys: ExteriorSystem, p) -> np.ndarray:
    """M[j, k, l] = d(psi_j)(X_k, X_l)."""
    x = dual_frame(p)
    n = x.shape[1]
    out = np.zeros((n, n, n))
    for j, f in enumerate(dpsi_forms(sys, p)):
        for k in range(n):
            for l in range(k + 1, n):
                out[j, k, l] = evaluate(f, [x[:, k], x[:, l]])
                out[j, l, k] = -out[j, k, l]
    return out


def structure_residual(sys: ExteriorSystem, p) -> float:
    """max over j, k < l of |(d psi_j - (a_j eta_{j+1} + b_j eta_{j-1}) ^ eta_j)(X_k, X_l)|."""
    p = sys.check_point(p)
    cfg = config_geometry(p)
    n = cfg.n
    m = 2 * n
    x = dual_frame(p)
    worst = 0.0
    for j, f in enumerate(dpsi_forms(sys, p)):
        eta = lambda i: _slot_form(m, i % n, cfg.tangents[i % n])
        rhs = wedge(cfg.a[j] * eta(j + 1) + cfg.b[j] * eta(j - 1), eta(j))
        diff = f - rhs
        for k in range(n):
            for l in range(k + 1, n):
                worst = max(worst, abs(evaluate(diff, [x[:, k], x[:, l]])))
    return worst


def structure_residual_unrestricted(sys: ExteriorSystem, p) -> float:
    """Same difference, evaluated on coordinate vectors (outside the distribution)."""
    p = sys.check_point(p)
    cfg = config_geometry(p)
    n = cfg.n
    m = 2 * n
    worst = 0.0
    for j, f in enumerate(dpsi_forms(sys, p)):
        eta = lambda i: _slot_form(m, i % n, cfg.tangents[i % n])
        rhs = wedge(cfg.a[j] * eta(j + 1) + cfg.b[j] * eta(j - 1), eta(j))
        worst = max(worst, (f - rhs).max_abs())
    return worst


# ---------------------------------------------------------------- integral elements


@dataclass(frozen=True)
class FamilyMember:
    point: np.ndarray
    basis: np.ndarray  # (2n, 2): v, w
    coords: np.ndarray  # (2, n): row 0 = eta_k(v), row 1 = eta_k(w)
    deltas: np.ndarray  # Delta_1..Delta_n (index 0 holds Delta_1)
    chain_residual: float  # residual of the dependent equation
    coefficients: tuple = field(default=())  # (A, B) numeric dpsi coefficients


def _det(a, b) -> float:
    return a[0] * b[1] - a[1] * b[0]


def consecutive_minors(coords: np.ndarray) -> np.ndarray:
    """Delta_j = (eta_{j+1} ^ eta_j)(v, w) for j = 1..n."""
    n = coords.shape[1]
    return np.array([_det(coords[:, (j + 1) % n], coords[:, j]) for j in range(n)])


def chain_coefficients(sys: ExteriorSystem, p) -> tuple[np.ndarray, np.ndarray]:
    """A_j = d psi_j(X_{j+1}, X_j), B_j = d psi_j(X_j, X_{j-1}) from numerics.

    On the chart plane, d psi_j(v, w) = A_j Delta_j + B_j Delta_{j-1}.
    """
    mfr = dpsi_on_frame(sys, p)
    n = mfr.shape[0]
    a = np.array([mfr[j, (j + 1) % n, j] for j in range(n)])
    b = np.array([mfr[j, j, (j - 1) % n] for j in range(n)])
    return a, b


def solve_deltas(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
    """Solve A_j Delta_j + B_j Delta_{j-1} = 0 (cyclic) with Delta_1 = -1.

    Returns (Delta_1..Delta_n, residual of the full n-equation system).
    """
    n = a.size
    mat = np.zeros((n, n - 1))  # unknowns Delta_2..Delta_n
    rhs = np.zeros(n)
    for j in range(n):
        for idx, coef in ((j, a[j]), ((j - 1) % n, b[j])):
            if idx == 0:
                rhs[j] -= coef * -1.0
            else:
                mat[j, idx - 1] += coef
    sol, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
    deltas = np.concatenate([[-1.0], sol])
    resid = float(np.max(np.abs(mat @ sol - rhs)))
    return deltas, resid


def _family_coords(deltas: np.ndarray, params: np.ndarray) -> np.ndarray:
    """Columns c_k = (eta_k(v), eta_k(w)) with det(c_{k+1}, c_k) = Delta_k."""
    n = deltas.size
    cols = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    if n == 3:
        cols.append(np.array([deltas[1], deltas[2]]))
        return np.column_stack(cols)
    cols.append(np.array([deltas[1], params[0]]))
    for j, t in zip(range(2, n - 2), params[1:]):
        cj = cols[j]
        s = np.array([cj[1], -cj[0]]) / (cj @ cj)
        cols.append(t * cj + deltas[j] * s)
    prev = cols[n - 2]
    if abs(prev[1]) < 1e-300:
        raise DomainError("family parameter at a singular value")
    cols.append(np.array([(deltas[n - 2] + prev[0] * deltas[n - 1]) / prev[1], deltas[n - 1]]))
    return np.column_stack(cols)


def _member(sys: ExteriorSystem, p, params) -> FamilyMember:
    a, b = chain_coefficients(sys, p)
    deltas, resid = solve_deltas(a, b)
    coords = _family_coords(deltas, params)
    x = dual_frame(p)
    basis = np.column_stack([x @ coords[0], x @ coords[1]])
    return FamilyMember(p, basis, coords, deltas, resid, (a, b))


def integral_family(sys: ExteriorSystem, p, params) -> FamilyMember:
    """The member of the (n-3)-parameter family of generic integral 2-planes
    with v = X_1 + sum p^k_1 X_k, w = X_2 + sum p^k_2 X_k.

    Parameters are p^3_2 followed by the scalings t_j in
    c_{j+1} = t_j c_j + Delta_j J c_j / |c_j|^2.
    """
    p = sys.check_point(p)
    n = len(sys.generators)
    if n < 4:
        raise InputError("the generic integral-element family is empty for n = 3")
    params = np.asarray(params, dtype=np.float64).reshape(-1)
    if params.size != n - 3:
        raise InputError(f"need {n - 3} parameters, got {params.size}")
    return _member(sys, p, params)


def general_family_member(sys: ExteriorSystem, p, rng: np.random.Generator) -> FamilyMember:
    """A seeded member of the family (the unique element when n = 3)."""
    n = len(sys.generators)
    if n == 3:
        return unique_element(sys, p)
    return integral_family(sys, p, rng.uniform(-1.5, 1.5, size=n - 3))


def unique_element(sys: ExteriorSystem, p) -> FamilyMember:
    """For n = 3 the chart plane is pinned down completely."""
    p = sys.check_point(p)
    if len(sys.generators) != 3:
        raise InputError("unique_element applies to n = 3 only")
    return _member(sys, p, np.zeros(0))


def family_constraint_rank(sys: ExteriorSystem, p) -> tuple[int, int]:
    """(rank, count) of the Jacobian of the n equations d psi_j(v, w) = 0 in the
    chart coordinates p^k_1, p^k_2 (k >= 3) at a family member."""
    n = len(sys.generators)
    member = integral_family(sys, p, np.linspace(0.3, 0.7, n - 3))
    x = dual_frame(p)
    forms = dpsi_forms(sys, p)

    def values(flat):
        coords = member.coords.copy()
        coords[:, 2:] = flat.reshape(2, n - 2)
        v, w = x @ coords[0], x @ coords[1]
        return np.array([evaluate(f, [v, w]) for f in forms])

    x0 = member.coords[:, 2:].reshape(-1)
    h = 1e-6
    jac = np.column_stack([(values(x0 + h * e) - values(x0 - h * e)) / (2 * h) for e in np.eye(x0.size)])
    return numerical_rank(jac).rank, n


def genericity_propagation(sys: ExteriorSystem, p, basis, tol: float = INTEGRAL_TOL) -> bool:
    """All eta_i ^ eta_{i+1} nonvanishing on an integral element."""
    basis = as_columns(basis, sys.dim)
    res = integral_residual(sys, p, basis)
    if res >= tol:
        raise PreconditionError(f"not an integral element (residual {res:.3g})")
    return bool(np.all(edge_products(p, basis) > GENERIC_TOL))


# ---------------------------------------------------------------- no 3-dimensional elements


@dataclass
class No3DResult:
    verdict: str  # "none" or "found"
    forcing_order: list  # [(variable k (1-based), "dpsi^j(v|w, .)"), ...] per checked member
    unforced: list
    search_converged: int
    search_generic: int
    members_checked: int
    message: str = ""

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "forcing_order": self.forcing_order,
            "unforced": self.unforced,
            "search_converged": self.search_converged,
            "search_generic": self.search_generic,
            "members_checked": self.members_checked,
            "message": self.message,
        }


def third_vector_rows(sys: ExteriorSystem, p, member: FamilyMember) -> tuple[np.ndarray, list]:
    """Linear conditions on u = sum_{a >= 3} f_a X_a for span(v, w, u) to be integral.

    Rows are d psi_j(v, X_a) and d psi_j(w, X_a); labels name each row.
    """
    x = dual_frame(p)
    n = x.shape[1]
    v, w = member.basis[:, 0], member.basis[:, 1]
    rows, labels = [], []
    for j, f in enumerate(dpsi_forms(sys, p)):
        for name, vec in (("v", v), ("w", w)):
            rows.append([evaluate(f, [vec, x[:, a]]) for a in range(2, n)])
            labels.append(f"dpsi{j + 1}({name},.)")
    return np.array(rows), labels


def force_cascade(rows: np.ndarray, labels: list, rtol: float = 1e-6) -> tuple[list, list]:
    """Repeatedly zero any unknown that is the only live entry of some row.

    Returns (forcing order as (unknown index, row label), unknowns left free).
    Unknown index k refers to column k, i.e. f_{k+3}.
    """
    scale = float(np.max(np.abs(rows), initial=0.0))
    live = np.abs(rows) > rtol * max(scale, 1e-300)
    free = set(range(rows.shape[1]))
    order = []
    progress = True
    while free and progress:
        progress = False
        for r in range(rows.shape[0]):
            hit = [k for k in free if live[r, k]]
            if len(hit) == 1:
                free.discard(hit[0])
                order.append((hit[0], labels[r]))
                progress = True
    return order, sorted(free)


def no_3d_integral_elements(sys: ExteriorSystem, p, seed: int = 0, trials: int = 200,
                            members: int = 3) -> No3DResult:
    """Check that no generic 3-dimensional integral elements exist at p.

    (a) cascade: for several family members, the linear conditions on a third
    vector force every coefficient to zero one at a time; (b) a seeded
    Gauss-Newton search over 3-planes finds no generic solution.
    """
    p = sys.check_point(p)
    n = len(sys.generators)
    rng = np.random.default_rng(seed)
    orders, unforced = [], []
    if n == 3:
        # the distribution itself is the only 3-plane in ker(psi)
        x = dual_frame(p)
        val = float(np.max(np.abs(dpsi_on_frame(sys, p))))
        cascade_none = val > 1e-6
        orders.append([("dpsi on ker(psi)", val)])
        checked = 1
    else:
        cascade_none = True
        for _ in range(members):
            params = rng.uniform(-1.5, 1.5, size=n - 3)
            member = integral_family(sys, p, params)
            rows, labels = third_vector_rows(sys, p, member)
            order, free = force_cascade(rows, labels)
            orders.append([(k + 3, lab) for k, lab in order])
            unforced.append([k + 3 for k in free])
            if free:
                cascade_none = False
        checked = members
    search = find_integral_elements(sys, p, n=3, seed=int(rng.integers(2**31)), trials=trials)
    search_none = search.empty
    if cascade_none != search_none:
        raise NumericalInconsistencyError(
            f"cascade ({'none' if cascade_none else 'inconclusive'}) and search "
            f"({len(search.samples)} generic solutions) disagree"
        )
    verdict = "none" if cascade_none else "found"
    msg = (f"cascade forced every coefficient on {checked} element(s); {search.message}"
           if cascade_none else search.message)
    return No3DResult(verdict, orders, unforced, search.converged, len(search.samples), checked, msg)


# ---------------------------------------------------------------- n = 3


def _triangle_coefficients(g: BilliardConfig) -> tuple[float, float]:
    c, l = g.cos_alpha, g.lengths
    return c[0] * l[1] / (c[1] * l[2]), c[2] * l[0] / (c[1] * l[2])


def theta_star_field(chart: Chart) -> FormField:
    """theta* = eta_2 + (c1 l2)/(c2 l3) eta_1 + (c3 l1)/(c2 l3) eta_3."""

    def ev(p):
        g = config_geometry(p)
        k1, k3 = _triangle_coefficients(g)
        coef = np.zeros(6)
        coef[0:2] = k1 * g.tangents[0]
        coef[2:4] = g.tangents[1]
        coef[4:6] = k3 * g.tangents[2]
        return AlternatingForm(6, 1, coef)

    return FormField(chart, 1, ev, name="theta*")


def triangle_system() -> ExteriorSystem:
    """The n = 3 billiard system with theta* adjoined."""
    base = billiard_system(3)
    gens = base.generators + [theta_star_field(base.chart)]
    return ExteriorSystem("billiard(n=3)+theta*", base.chart, gens, n=2, independence=base.independence,
                          genericity=base.genericity, admissible=is_admissible,
                          sample_point=base.sample_point)


def triangle_points(alpha1: float, alpha2: float, l1: float) -> np.ndarray:
    if not (alpha1 > 0 and alpha2 > 0 and alpha1 + alpha2 < np.pi / 2 and l1 > 0):
        raise InputError("need alpha1, alpha2 > 0, alpha1 + alpha2 < pi/2 and l1 > 0")
    alpha3 = np.pi / 2 - alpha1 - alpha2
    s3 = math.sin(2 * alpha3)
    if s3 <= 1e-12:
        raise InputError("degenerate triangle (alpha3 too close to 0)")
    l3 = l1 * math.sin(2 * alpha2) / s3
    return np.array([0.0, 0.0, l1, 0.0, l3 * math.cos(2 * alpha1), l3 * math.sin(2 * alpha1)])


@dataclass(frozen=True)
class TriangleObstruction:
    torsion: float
    claimed: float
    theta_on_element: float  # |theta*| on the unique integral element
    point: np.ndarray

    @property
    def relative_error(self) -> float:
        return abs(self.torsion - self.claimed) / max(abs(self.claimed), 1e-300)


def triangle_obstruction(alpha1: float, alpha2: float, l1: float,
                         h: Optional[float] = None) -> TriangleObstruction:
    """FD torsion of theta* against 6 l1 c1 c2 s1 s2 / (c2^2 l3^2).

    The torsion is d(theta*)(Y_1, Y_3), with Y the dual frame of the coframe
    (eta_1, eta_3, theta*, psi_1, psi_2, psi_3).
    """
    p = triangle_points(alpha1, alpha2, l1)
    sys3 = billiard_system(3)
    g = config_geometry(p)
    theta = theta_star_field(sys3.chart)
    th = theta(p)
    cof = coframe_matrix(p)
    rows = np.vstack([cof[0], cof[2], th.coeffs, cof[3:]])
    if numerical_rank(rows, 1e-12).rank < 6:
        raise NumericalInconsistencyError("(eta1, eta3, theta*, psi) is not a coframe here")
    y = np.linalg.inv(rows)
    torsion = evaluate(d_numeric(theta, p, h), [y[:, 0], y[:, 1]])
    c1, c2 = math.cos(alpha1), math.cos(alpha2)
    s1, s2 = math.sin(alpha1), math.sin(alpha2)
    claimed = 6 * l1 * c1 * c2 * s1 * s2 / (c2 ** 2 * g.lengths[2] ** 2)
    e = unique_element(sys3, p).basis
    on_e = max(abs(evaluate(th, [e[:, 0]])), abs(evaluate(th, [e[:, 1]])))
    return TriangleObstruction(float(torsion), float(claimed), float(on_e), p)
