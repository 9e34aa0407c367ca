"""Differential forms on a single coordinate chart, with a finite-difference
exterior derivative."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from edslab.exterior import AlternatingForm, _positions, multi_indices
from edslab.errors import DomainError, InputError

STEP_SCALE = 1e-5


def default_step(p: np.ndarray) -> float:
    return STEP_SCALE * max(1.0, float(np.max(np.abs(p))) if p.size else 1.0)


@dataclass(frozen=True)
class Chart:
    labels: tuple
    step_rule: Optional[Callable[[np.ndarray], float]] = field(default=None, compare=False)

    def __post_init__(self):
        labels = tuple(str(s) for s in self.labels)
        if not labels:
            raise InputError("a chart needs at least one coordinate")
        if len(set(labels)) != len(labels):
            raise InputError(f"coordinate labels must be distinct: {labels}")
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def step(self, p) -> float:
        p = np.asarray(p, dtype=np.float64)
        return (self.step_rule or default_step)(p)

    def point(self, values) -> np.ndarray:
        p = np.asarray(values, dtype=np.float64).reshape(-1)
        if p.size != self.dim:
            raise InputError(f"point has {p.size} coordinates, chart has {self.dim}")
        return p


class FormField:
    """A degree-k form field: point -> AlternatingForm.

    ``derivative``, when given, is an analytic evaluator for the exterior
    derivative (point -> degree k+1 form).
    """

    def __init__(
        self,
        chart: Chart,
        degree: int,
        evaluator: Callable[[np.ndarray], AlternatingForm],
        derivative: Optional[Callable[[np.ndarray], AlternatingForm]] = None,
        name: str = "",
    ):
        if degree < 0:
            raise InputError("negative degree")
        self.chart = chart
        self.degree = degree
        self.evaluator = evaluator
        self.derivative = derivative
        self.name = name

    def __call__(self, p) -> AlternatingForm:
        return eval_at(self, p)

    def __repr__(self):
        return f"FormField({self.name or '?'}, degree={self.degree}, dim={self.chart.dim})"


def eval_at(ff: FormField, p) -> AlternatingForm:
    p = ff.chart.point(p)
    try:
        val = ff.evaluator(p)
    except (ZeroDivisionError, FloatingPointError, ValueError, DomainError) as exc:
        raise DomainError(f"{ff.name or 'form field'} cannot be evaluated at this point: {exc}") from exc
    if val.dim != ff.chart.dim or val.degree != ff.degree:
        raise DomainError(
            f"{ff.name or 'form field'} returned a (dim {val.dim}, deg {val.degree}) form, "
            f"expected (dim {ff.chart.dim}, deg {ff.degree})"
        )
    if not np.all(np.isfinite(val.coeffs)):
        raise DomainError(f"{ff.name or 'form field'} is not finite at this point")
    return val


@lru_cache(maxsize=None)
def _d_table(m: int, k: int):
    """For each (k+1)-index K and slot r: coordinate K[r], position of K minus
    K[r] among k-indices, and the sign (-1)^r of moving dx^{K[r]} to the front."""
    rows = multi_indices(m, k + 1)
    pos_k = _positions(m, k)
    out_pos, coord, src, sign = [], [], [], []
    for kpos, row in enumerate(rows):
        row = [int(i) for i in row]
        for r, a in enumerate(row):
            rest = tuple(row[:r] + row[r + 1:])
            out_pos.append(kpos)
            coord.append(a)
            src.append(pos_k[rest])
            sign.append(-1.0 if r % 2 else 1.0)
    return (np.array(out_pos, dtype=np.intp), np.array(coord, dtype=np.intp),
            np.array(src, dtype=np.intp), np.array(sign))


def _assemble_d(grad: np.ndarray, m: int, k: int) -> AlternatingForm:
    """d(sum_I f_I dx^I) from grad[a, I] = df_I/dx^a."""
    if k + 1 > m:
        return AlternatingForm.zero(m, k + 1)
    out_pos, coord, src, sign = _d_table(m, k)
    c = np.zeros(multi_indices(m, k + 1).shape[0])
    np.add.at(c, out_pos, sign * grad[coord, src])
    return AlternatingForm(m, k + 1, c)


def d_numeric(ff: FormField, p, h: Optional[float] = None) -> AlternatingForm:
    """Central-difference exterior derivative at ``p`` (error O(h^2))."""
    p = ff.chart.point(p)
    m = ff.chart.dim
    if h is None:
        h = ff.chart.step(p)
    if not h > 0:
        raise InputError(f"finite-difference step must be positive, got {h}")
    ncoef = multi_indices(m, ff.degree).shape[0]
    grad = np.empty((m, ncoef))
    for a in range(m):
        e = np.zeros(m)
        e[a] = h
        grad[a] = (eval_at(ff, p + e).coeffs - eval_at(ff, p - e).coeffs) / (2.0 * h)
    return _assemble_d(grad, m, ff.degree)


def derivative_residual(ff: FormField, p, h: Optional[float] = None) -> float:
    """max |d_numeric - analytic derivative| over coefficients at ``p``."""
    if ff.derivative is None:
        raise InputError(f"{ff.name or 'form field'} has no analytic derivative")
    p = ff.chart.point(p)
    analytic = ff.derivative(p)
    return float(np.max(np.abs(d_numeric(ff, p, h).coeffs - analytic.coeffs), initial=0.0))


def constant_field(chart: Chart, form: AlternatingForm, name: str = "") -> FormField:
    if form.dim != chart.dim:
        raise InputError("form and chart dimensions differ")
    zero = AlternatingForm.zero(chart.dim, form.degree + 1)
    return FormField(chart, form.degree, lambda p: form, derivative=lambda p: zero, name=name)


def derivative_field(ff: FormField, h: Optional[float] = None) -> FormField:
    """The field dφ: analytic when available, otherwise numeric on demand."""
    name = f"d({ff.name})" if ff.name else "d(?)"
    if ff.derivative is not None:
        return FormField(ff.chart, ff.degree + 1, ff.derivative, name=name)
    return FormField(ff.chart, ff.degree + 1, lambda p: d_numeric(ff, p, h), name=name)


def field_from_coefficients(
    chart: Chart, degree: int, terms: Sequence[tuple[tuple, Callable[[np.ndarray], float]]], name: str = ""
) -> FormField:
    """A field sum_I f_I(p) dx^I from ``[(index tuple, f_I), ...]``."""
    m = chart.dim

    def evaluator(p):
        return AlternatingForm.from_terms(m, degree, _accumulate(terms, p))

    return FormField(chart, degree, evaluator, name=name)


def _accumulate(terms, p) -> dict:
    acc: dict = {}
    for idx, fn in terms:
        acc[tuple(idx)] = acc.get(tuple(idx), 0.0) + float(fn(p))
    return acc
