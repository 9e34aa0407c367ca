"""Exterior differential systems: integral elements, polar spaces, the
codimension of the integral-element variety, Cartan's test and a
Gauss-Newton search for integral elements.

All linear-algebra decisions go through :func:`edslab.linalg.numerical_rank`
(singular values above ``1e-8 * sigma_max`` count toward rank).
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from edslab.chart import Chart, FormField, derivative_field, eval_at
from edslab.errors import (
    DomainError,
    InputError,
    NumericalInconsistencyError,
    PreconditionError,
)
from edslab.exterior import AlternatingForm, as_columns, evaluate_many, multi_indices
from edslab.linalg import RANK_RTOL, RankInfo, numerical_rank, orthonormal_complement

INTEGRAL_TOL = 1e-8
GN_MAX_ITER = 50
GN_TOL = 1e-10
GN_MAX_HALVINGS = 30


class ExteriorSystem:
    """A differential ideal generated by ``generators`` on one chart.

    Parameters
    ----------
    n : int
        Dimension of the integral manifolds sought.
    independence : list of 1-form fields
        Their wedge is the independence condition (may be shorter than n).
    genericity : callable (p, basis) -> bool, optional
        Extra open condition on integral elements.
    admissible : callable p -> bool, optional
        Defines the open set the system lives on.
    sample_point : callable rng -> point, optional
        Draws a general admissible point.
    sample_element : callable (p, rng) -> (m, n) basis, optional
        Draws a general integral element at ``p``; defaults to the solver.
    first_vector : callable p -> vector, optional
        Preferred first vector for Cartan flags.
    """

    def __init__(
        self,
        name: str,
        chart: Chart,
        generators: Sequence[FormField],
        n: int,
        independence: Sequence[FormField] = (),
        genericity: Optional[Callable] = None,
        admissible: Optional[Callable] = None,
        sample_point: Optional[Callable] = None,
        sample_element: Optional[Callable] = None,
        first_vector: Optional[Callable] = None,
        h: Optional[float] = None,
    ):
        if not generators:
            raise InputError("a system needs at least one generator")
        for g in generators:
            if g.chart.dim != chart.dim:
                raise InputError(f"generator {g} lives on a different chart")
            if not 1 <= g.degree <= chart.dim:
                raise InputError(f"generator {g} has degree outside 1..{chart.dim}")
        for w in independence:
            if w.degree != 1:
                raise InputError("independence forms must be 1-forms")
        if not 1 <= n <= chart.dim:
            raise InputError(f"integral dimension {n} outside 1..{chart.dim}")
        self.name = name
        self.chart = chart
        self.generators = list(generators)
        self.n = n
        self.independence = list(independence)
        self.genericity = genericity
        self.admissible = admissible
        self.sample_point = sample_point
        self.sample_element = sample_element
        self.first_vector = first_vector
        self.h = h
        self.closure = self.generators + [derivative_field(g, h) for g in self.generators]
        self._cache: dict = {}

    @property
    def dim(self) -> int:
        return self.chart.dim

    def __repr__(self):
        return f"ExteriorSystem({self.name!r}, dim={self.dim}, n={self.n}, generators={len(self.generators)})"

    def check_point(self, p) -> np.ndarray:
        p = self.chart.point(p)
        if self.admissible is not None and not self.admissible(p):
            raise DomainError(f"point is not admissible for {self.name}")
        return p

    def forms_at(self, p) -> dict:
        """Closure forms at ``p`` grouped by degree; identically-zero ones dropped."""
        p = self.check_point(p)
        key = p.tobytes()
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        by_deg: dict = {}
        for ff in self.closure:
            val = eval_at(ff, p)
            if ff.degree <= self.dim and np.any(val.coeffs != 0.0):
                by_deg.setdefault(ff.degree, []).append(val)
        if len(self._cache) > 256:
            self._cache.clear()
        self._cache[key] = by_deg
        return by_deg

    def independence_at(self, p) -> np.ndarray:
        p = self.chart.point(p)
        if not self.independence:
            return np.zeros((0, self.dim))
        return np.vstack([eval_at(w, p).coeffs for w in self.independence])

    def is_generic(self, p, basis) -> bool:
        if self.genericity is None:
            return True
        return bool(self.genericity(self.chart.point(p), as_columns(basis, self.dim)))


# ---------------------------------------------------------------- evaluation


def _subset_tuples(basis: np.ndarray, d: int) -> np.ndarray:
    subsets = multi_indices(basis.shape[1], d)
    return basis[:, subsets].transpose(1, 0, 2)


def constraint_values(forms_by_deg: dict, basis: np.ndarray, max_degree: int) -> np.ndarray:
    """Every closure form of degree <= max_degree on every increasing subset of the basis."""
    out = []
    for d in sorted(forms_by_deg):
        if d > max_degree or d > basis.shape[1]:
            continue
        out.append(evaluate_many(forms_by_deg[d], _subset_tuples(basis, d)).ravel())
    return np.concatenate(out) if out else np.zeros(0)


def integral_residual(sys: ExteriorSystem, p, basis) -> float:
    basis = as_columns(basis, sys.dim)
    vals = constraint_values(sys.forms_at(p), basis, basis.shape[1])
    return float(np.max(np.abs(vals), initial=0.0))


def _require_full_rank(basis: np.ndarray) -> None:
    if numerical_rank(basis, 1e-10).rank < basis.shape[1]:
        raise InputError("basis vectors are linearly dependent")


def is_integral_element(sys: ExteriorSystem, p, basis, tol: float = INTEGRAL_TOL) -> bool:
    """True when every closure form of degree <= dim E vanishes on E."""
    basis = as_columns(basis, sys.dim)
    _require_full_rank(basis)
    return integral_residual(sys, p, basis) < tol


# ---------------------------------------------------------------- polar spaces


def c0_info(sys: ExteriorSystem, p) -> RankInfo:
    ones = sys.forms_at(p).get(1, [])
    if not ones:
        return numerical_rank(np.zeros((0, sys.dim)))
    return numerical_rank(np.vstack([f.coeffs for f in ones]))


def c0(sys: ExteriorSystem, p) -> int:
    """Rank of the 1-forms of the ideal at ``p``."""
    return c0_info(sys, p).rank


def polar_equations(sys: ExteriorSystem, p, flag) -> np.ndarray:
    """Rows are the covectors v -> phi(e_I, v) over closure forms phi of degree
    d <= j+1 and (d-1)-subsets I of the flag."""
    flag = as_columns(flag, sys.dim)
    m, j = flag.shape
    eye = np.eye(m)
    rows = []
    for d, forms in sorted(sys.forms_at(p).items()):
        if d > j + 1:
            continue
        subsets = multi_indices(j, d - 1)
        ns = subsets.shape[0]
        tuples = np.empty((ns, m, m, d))
        if d > 1:
            tuples[:, :, :, : d - 1] = flag[:, subsets].transpose(1, 0, 2)[:, None, :, :]
        tuples[:, :, :, d - 1] = np.broadcast_to(eye, (ns, m, m))
        vals = evaluate_many(forms, tuples.reshape(ns * m, m, d))
        rows.append(vals.reshape(len(forms) * ns, m))
    return np.vstack(rows) if rows else np.zeros((0, m))


@dataclass(frozen=True)
class PolarSpace:
    basis: np.ndarray  # (m, dim H) orthonormal columns
    c: int  # codimension of H in the tangent space
    rank_info: RankInfo


def polar_space(sys: ExteriorSystem, p, flag, tol: float = INTEGRAL_TOL) -> PolarSpace:
    flag = as_columns(flag, sys.dim)
    _require_full_rank(flag)
    res = integral_residual(sys, p, flag)
    if res >= tol:
        raise PreconditionError(f"flag does not span an integral element (residual {res:.3g})")
    rows = polar_equations(sys, p, flag)
    info = numerical_rank(rows)
    if rows.shape[0]:
        _, _, vt = np.linalg.svd(rows, full_matrices=True)
        h_basis = vt[info.rank:].T.copy()
    else:
        h_basis = np.eye(sys.dim)
    # E must lie in H(E)
    if flag.shape[1]:
        leak = flag - h_basis @ (h_basis.T @ flag)
        if np.max(np.abs(leak)) > 1e-6 * max(1.0, np.max(np.abs(flag))):
            raise NumericalInconsistencyError("flag is not contained in its polar space")
    return PolarSpace(h_basis, info.rank, info)


# ---------------------------------------------------------------- Grassmann charts


def plane_jacobian(forms_by_deg: dict, basis: np.ndarray, directions: np.ndarray, max_degree: int) -> np.ndarray:
    """Exact Jacobian of :func:`constraint_values` under e_i -> e_i + directions @ x_i.

    Column ordering is ``x.reshape(-1)`` for x of shape (r, n): column a*n + i.
    Forms are evaluated at a fixed point, so each constraint is multilinear in
    the plane basis and its derivative replaces one slot by a direction.
    """
    m, n = basis.shape
    r = directions.shape[1]
    blocks = []
    for d in sorted(forms_by_deg):
        if d > max_degree or d > n:
            continue
        forms = forms_by_deg[d]
        subsets = multi_indices(n, d)
        ns = subsets.shape[0]
        base = basis[:, subsets].transpose(1, 0, 2)  # (ns, m, d)
        jac = np.zeros((len(forms), ns, r, n))
        for slot in range(d):
            tuples = np.repeat(base[:, None, :, :], r, axis=1)  # (ns, r, m, d)
            tuples[:, :, :, slot] = directions.T[None, :, :]
            vals = evaluate_many(forms, tuples.reshape(ns * r, m, d)).reshape(len(forms), ns, r)
            cols = subsets[:, slot]
            for s in range(ns):
                jac[:, s, :, cols[s]] += vals[:, s, :]
        blocks.append(jac.reshape(len(forms) * ns, r * n))
    return np.vstack(blocks) if blocks else np.zeros((0, r * n))


def plane_jacobian_fd(forms_by_deg: dict, basis: np.ndarray, directions: np.ndarray,
                      max_degree: int, h: float = 1e-6) -> np.ndarray:
    """Central-difference version of :func:`plane_jacobian` (independent check)."""
    m, n = basis.shape
    r = directions.shape[1]
    cols = []
    for a in range(r):
        for i in range(n):
            bp = basis.copy()
            bm = basis.copy()
            bp[:, i] += h * directions[:, a]
            bm[:, i] -= h * directions[:, a]
            cols.append((constraint_values(forms_by_deg, bp, max_degree)
                         - constraint_values(forms_by_deg, bm, max_degree)) / (2 * h))
    return np.column_stack(cols)


def orthonormal_plane(basis) -> np.ndarray:
    q, _ = np.linalg.qr(np.asarray(basis, dtype=np.float64))
    return q


@dataclass(frozen=True)
class CodimResult:
    codim: int
    rank_info: RankInfo
    fiber_dim: int


def codim_variety(sys: ExteriorSystem, p, basis, tol: float = INTEGRAL_TOL) -> CodimResult:
    """Fiberwise codimension of V_n at (p, E) in the Grassmannian G(n, T_p)."""
    basis = as_columns(basis, sys.dim)
    _require_full_rank(basis)
    e = orthonormal_plane(basis)
    res = integral_residual(sys, p, e)
    if res >= tol:
        raise PreconditionError(f"plane is not an integral element (residual {res:.3g})")
    if not sys.is_generic(p, e):
        raise PreconditionError("plane violates the system's genericity condition")
    q = orthonormal_complement(e)
    n = e.shape[1]
    jac = plane_jacobian(sys.forms_at(p), e, q, n)
    info = numerical_rank(jac)
    return CodimResult(info.rank, info, n * (sys.dim - n) - info.rank)


def codim_variety_at(sys: ExteriorSystem, p, basis) -> int:
    return codim_variety(sys, p, basis).codim


# ---------------------------------------------------------------- solver


@dataclass
class IntegralSearch:
    samples: list  # (m, n) bases of generic integral elements
    local_dims: list
    local_dimension: Optional[int]
    consistent: bool
    converged: int  # starts that converged (generic or not)
    rejected_nongeneric: int
    message: str = ""

    @property
    def empty(self) -> bool:
        return not self.samples


def _graph_chart(sys: ExteriorSystem, p, n: int, rng: np.random.Generator):
    """Plane chart e_i = base_i + K x_i over the independence forms, padded
    with random 1-forms when fewer than n are given."""
    w = sys.independence_at(p)[:n]
    if w.shape[0] < n:
        w = np.vstack([w, rng.standard_normal((n - w.shape[0], sys.dim))])
    base = np.linalg.pinv(w)
    k = orthonormal_complement(base)
    return base, k


def gauss_newton_plane(forms_by_deg, base, kdir, x0, max_iter=GN_MAX_ITER, tol=GN_TOL):
    """Damped Gauss-Newton with pseudoinverse steps; returns (x, residual, iters)."""
    n = base.shape[1]
    x = x0.copy()

    def resid(xx):
        return constraint_values(forms_by_deg, base + kdir @ xx, n)

    f = resid(x)
    nf = np.linalg.norm(f)
    it = 0
    for it in range(1, max_iter + 1):
        if np.max(np.abs(f), initial=0.0) < tol:
            break
        jac = plane_jacobian(forms_by_deg, base + kdir @ x, kdir, n)
        step = -(np.linalg.pinv(jac, rcond=1e-12) @ f).reshape(x.shape)
        t = 1.0
        for _ in range(GN_MAX_HALVINGS):
            xn = x + t * step
            fn = resid(xn)
            if np.linalg.norm(fn) < nf:
                break
            t *= 0.5
        else:
            break
        x, f, nf = xn, fn, np.linalg.norm(fn)
    return x, float(np.max(np.abs(f), initial=0.0)), it


def find_integral_elements(
    sys: ExteriorSystem, p, n: Optional[int] = None, seed: int = 0, trials: int = 20,
    start_scale: float = 1.0, keep: Optional[int] = None,
) -> IntegralSearch:
    """Seeded Gauss-Newton search for generic n-dimensional integral elements.

    Stops after ``keep`` generic solutions when given.  An empty result means
    no start converged to a generic integral element.
    """
    n = sys.n if n is None else n
    p = sys.check_point(p)
    forms = sys.forms_at(p)
    rng = np.random.default_rng(seed)
    base, kdir = _graph_chart(sys, p, n, rng)
    samples, dims = [], []
    converged = rejected = 0
    for _ in range(trials):
        x0 = start_scale * rng.standard_normal((kdir.shape[1], n))
        x, res, _ = gauss_newton_plane(forms, base, kdir, x0)
        if res >= GN_TOL:
            continue
        converged += 1
        plane = base + kdir @ x
        if numerical_rank(plane, 1e-10).rank < n or not sys.is_generic(p, plane):
            rejected += 1
            continue
        q = orthonormal_complement(orthonormal_plane(plane))
        jac = plane_jacobian(forms, orthonormal_plane(plane), q, n)
        dims.append(n * (sys.dim - n) - numerical_rank(jac).rank)
        samples.append(plane)
        if keep is not None and len(samples) >= keep:
            break
    consistent = len(set(dims)) <= 1
    local = dims[0] if dims and consistent else (Counter(dims).most_common(1)[0][0] if dims else None)
    if not samples:
        msg = (f"no generic {n}-dimensional integral elements found from {trials} starts "
               f"({converged} converged, {rejected} non-generic); restrict to the subvariety "
               "where integral elements exist")
    elif not consistent:
        msg = f"local dimensions disagree across samples: {sorted(set(dims))}"
    else:
        msg = f"{len(samples)} generic integral elements, local dimension {local}"
    return IntegralSearch(samples, dims, local, consistent, converged, rejected, msg)


# ---------------------------------------------------------------- Cartan's test

_WORDS = ["zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"]


def _word(k: int) -> str:
    return _WORDS[k] if 0 <= k < len(_WORDS) else str(k)


def generality_text(s: int, k: int) -> str:
    if k == 0:
        return "a choice of constants"
    return f"{_word(s)} function{'s' if s != 1 else ''} of {_word(k)} variable{'s' if k != 1 else ''}"


@dataclass
class CartanReport:
    n: int
    c: list
    sum_c: int
    codim: int
    involutive: bool
    characters: list  # s_1..s_n; s_n may be fractional when not involutive
    k0: int
    generality: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def signature(self) -> tuple:
        """The integer data that must agree across general points."""
        return (tuple(self.c), self.codim, self.involutive)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "c": list(self.c),
            "sum_c": self.sum_c,
            "codim": self.codim,
            "involutive": self.involutive,
            "characters": list(self.characters),
            "k0": self.k0,
            "generality": self.generality,
            "diagnostics": self.diagnostics,
        }


def characters_from(c: Sequence[int], codim: int, m: int, n: int) -> list:
    """s_k = c_k - c_{k-1} for k < n; the top character closes the identity
    dim V_n(fiber) = sum_k k s_k."""
    s = [c[k] - c[k - 1] for k in range(1, n)]
    fiber = n * (m - n) - codim
    top = Fraction(fiber - sum(k * sk for k, sk in enumerate(s, start=1)), n)
    s.append(int(top) if top.denominator == 1 else float(top))
    return s


def _flag_in(sys: ExteriorSystem, p, e: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = e.shape[1]
    g = rng.standard_normal((n, n))
    rot, _ = np.linalg.qr(g)
    flag = e @ rot
    if sys.first_vector is not None:
        z = np.asarray(sys.first_vector(p), dtype=np.float64)
        coef, *_ = np.linalg.lstsq(e, z, rcond=None)
        if np.linalg.norm(e @ coef - z) < 1e-8 * max(1.0, np.linalg.norm(z)):
            rest = orthonormal_complement(coef[:, None])
            rest = rest @ np.linalg.qr(rng.standard_normal((n - 1, n - 1)))[0] if n > 1 else rest
            flag = np.column_stack([z, e @ rest])
    return flag


def cartan_test(sys: ExteriorSystem, p, basis, seed: int = 0) -> CartanReport:
    p = sys.check_point(p)
    e = as_columns(basis, sys.dim)
    n = e.shape[1]
    rng = np.random.default_rng(seed)
    codim_res = codim_variety(sys, p, e)
    flag = _flag_in(sys, p, orthonormal_plane(e), rng)
    info0 = c0_info(sys, p)
    c = [info0.rank]
    infos = [info0]
    for j in range(1, n):
        ps = polar_space(sys, p, flag[:, :j])
        c.append(ps.c)
        infos.append(ps.rank_info)
    sum_c = sum(c)
    if sum_c > codim_res.codim:
        raise NumericalInconsistencyError(
            f"Cartan inequality violated: sum c = {sum_c} > codim = {codim_res.codim}"
        )
    chars = characters_from(c, codim_res.codim, sys.dim, n)
    involutive = sum_c == codim_res.codim
    k0 = max((k for k, sk in enumerate(chars, start=1) if sk != 0), default=0)
    if involutive:
        text = generality_text(int(chars[k0 - 1]) if k0 else 0, k0)
    else:
        text = f"Cartan's test fails by {codim_res.codim - sum_c}; no generality estimate"
    all_infos = infos + [codim_res.rank_info]
    diag = {
        "rank_rtol": RANK_RTOL,
        "polar_ranks": [i.as_dict() for i in infos],
        "codim_rank": codim_res.rank_info.as_dict(),
        "tight_margin": any(i.tight for i in all_infos),
        "seed": seed,
    }
    return CartanReport(n, c, sum_c, codim_res.codim, involutive, chars, k0, text, diag)


def general_element(sys: ExteriorSystem, p, rng: np.random.Generator) -> np.ndarray:
    if sys.sample_element is not None:
        return as_columns(sys.sample_element(p, rng), sys.dim)
    found = find_integral_elements(sys, p, sys.n, seed=int(rng.integers(2**31)), trials=20, keep=1)
    if found.empty:
        raise NumericalInconsistencyError(f"no generic integral element found for {sys.name}: {found.message}")
    return found.samples[0]


def general_point(sys: ExteriorSystem, rng: np.random.Generator) -> np.ndarray:
    if sys.sample_point is not None:
        return sys.check_point(sys.sample_point(rng))
    while True:
        p = rng.standard_normal(sys.dim)
        if sys.admissible is None or sys.admissible(p):
            return p


@dataclass
class Survey:
    reports: list
    points: list
    agree: bool


def cartan_survey(sys: ExteriorSystem, samples: int = 5, seed: int = 0) -> Survey:
    """Cartan's test at ``samples`` independently seeded general points."""
    children = np.random.SeedSequence(seed).spawn(samples)
    reports, points = [], []
    for child in children:
        rng = np.random.default_rng(child)
        p = general_point(sys, rng)
        e = general_element(sys, p, rng)
        reports.append(cartan_test(sys, p, e, seed=int(rng.integers(2**31))))
        points.append(p)
    agree = len({r.signature for r in reports}) == 1
    return Survey(reports, points, agree)


def flag_c_values(sys: ExteriorSystem, p, basis, seed: int) -> list:
    """c_0..c_{n-1} along one seeded random flag (first_vector ignored)."""
    e = orthonormal_plane(as_columns(basis, sys.dim))
    rng = np.random.default_rng(seed)
    rot, _ = np.linalg.qr(rng.standard_normal((e.shape[1], e.shape[1])))
    flag = e @ rot
    return [c0(sys, p)] + [polar_space(sys, p, flag[:, :j]).c for j in range(1, e.shape[1])]
