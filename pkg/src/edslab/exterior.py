"""Pointwise exterior algebra on R^m.

Forms are stored densely over increasing multi-indices in lexicographic
order (the order of ``itertools.combinations``).  Coordinate indices are
0-based throughout the package.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from edslab import kernels
from edslab.errors import InputError

ALGEBRA_ATOL = 1e-9


@lru_cache(maxsize=None)
def multi_indices(m: int, k: int) -> np.ndarray:
    """All increasing k-tuples from range(m) as a read-only (C(m,k), k) array."""
    if k < 0 or k > m:
        arr = np.zeros((0, max(k, 0)), dtype=np.intp)
    else:
        arr = np.array(list(itertools.combinations(range(m), k)), dtype=np.intp).reshape(math.comb(m, k), k)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def _positions(m: int, k: int) -> dict:
    return {tuple(int(i) for i in row): pos for pos, row in enumerate(multi_indices(m, k))}


def _sort_sign(idx: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting ``idx``, or 0 on a repeated index."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, tuple(sorted(idx))
    inversions = sum(1 for a in range(len(idx)) for b in range(a + 1, len(idx)) if idx[a] > idx[b])
    return (-1) ** inversions, tuple(sorted(idx))


@dataclass(frozen=True, eq=False)
class AlternatingForm:
    """A degree-``degree`` alternating multilinear form on R^``dim``.

    Degrees above ``dim`` are allowed and carry no coefficients (the zero
    form), so wedge products never need special-casing by callers.
    """

    dim: int
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.dim < 1:
            raise InputError(f"dimension must be positive, got {self.dim}")
        if self.degree < 0:
            raise InputError(f"negative degree {self.degree}")
        c = np.array(self.coeffs, dtype=np.float64).reshape(-1)
        if c.size != math.comb(self.dim, self.degree):
            raise InputError(
                f"expected {math.comb(self.dim, self.degree)} coefficients, got {c.size}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls, dim: int, degree: int) -> "AlternatingForm":
        return cls(dim, degree, np.zeros(math.comb(dim, degree)))

    @classmethod
    def scalar(cls, dim: int, value: float) -> "AlternatingForm":
        return cls(dim, 0, np.array([value], dtype=np.float64))

    @classmethod
    def from_terms(cls, dim: int, degree: int, terms: Mapping[Sequence[int], float]) -> "AlternatingForm":
        """Build from ``{index tuple: coefficient}``; tuples may be unsorted."""
        c = np.zeros(math.comb(dim, degree))
        pos = _positions(dim, degree)
        for idx, val in terms.items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise InputError(f"index {idx} does not have degree {degree}")
            if any(i < 0 or i >= dim for i in idx):
                raise InputError(f"index {idx} out of range for dim {dim}")
            sign, key = _sort_sign(idx)
            if sign:
                c[pos[key]] += sign * val
        return cls(dim, degree, c)

    def coeff(self, idx: Sequence[int]) -> float:
        sign, key = _sort_sign(tuple(idx))
        if not sign:
            return 0.0
        return sign * float(self.coeffs[_positions(self.dim, self.degree)[key]])

    def terms(self, atol: float = 0.0) -> dict:
        rows = multi_indices(self.dim, self.degree)
        return {
            tuple(int(i) for i in rows[p]): float(v)
            for p, v in enumerate(self.coeffs)
            if abs(v) > atol
        }

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def allclose(self, other: "AlternatingForm", atol: float = ALGEBRA_ATOL) -> bool:
        _check_same_space(self, other)
        return bool(np.allclose(self.coeffs, other.coeffs, rtol=0.0, atol=atol))

    def _binary(self, other, op):
        _check_same_space(self, other)
        return AlternatingForm(self.dim, self.degree, op(self.coeffs, other.coeffs))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __neg__(self):
        return AlternatingForm(self.dim, self.degree, -self.coeffs)

    def __mul__(self, s):
        if isinstance(s, AlternatingForm):
            return NotImplemented
        return AlternatingForm(self.dim, self.degree, float(s) * self.coeffs)

    __rmul__ = __mul__

    def __repr__(self):
        shown = ", ".join(f"{k}: {v:.6g}" for k, v in self.terms(atol=0.0).items())
        return f"AlternatingForm(dim={self.dim}, degree={self.degree}, {{{shown}}})"


def _check_same_space(a: AlternatingForm, b: AlternatingForm) -> None:
    if a.dim != b.dim or a.degree != b.degree:
        raise InputError(
            f"forms live in different spaces: (dim {a.dim}, deg {a.degree}) vs (dim {b.dim}, deg {b.degree})"
        )


def dx(dim: int, *indices: int) -> AlternatingForm:
    """The basis form dx^{i1} ^ ... ^ dx^{ik} (indices in the given order)."""
    return AlternatingForm.from_terms(dim, len(indices), {tuple(indices): 1.0})


def one_form(coeffs: Iterable[float]) -> AlternatingForm:
    c = np.asarray(list(coeffs), dtype=np.float64)
    return AlternatingForm(c.size, 1, c)


@lru_cache(maxsize=None)
def _wedge_table(m: int, p: int, q: int):
    rows_a = multi_indices(m, p)
    rows_b = multi_indices(m, q)
    pos = _positions(m, p + q)
    ia, ib, ic, sg = [], [], [], []
    for a, ra in enumerate(rows_a):
        sa = set(int(i) for i in ra)
        for b, rb in enumerate(rows_b):
            if sa.intersection(int(j) for j in rb):
                continue
            inv = sum(1 for i in ra for j in rb if i > j)
            ia.append(a)
            ib.append(b)
            ic.append(pos[tuple(sorted(int(i) for i in (*ra, *rb)))])
            sg.append(-1.0 if inv % 2 else 1.0)
    out = tuple(np.array(x) for x in (ia, ib, ic)) + (np.array(sg, dtype=np.float64),)
    return out


def wedge(a: AlternatingForm, b: AlternatingForm) -> AlternatingForm:
    if a.dim != b.dim:
        raise InputError(f"dimension mismatch in wedge: {a.dim} vs {b.dim}")
    m, p, q = a.dim, a.degree, b.degree
    if p + q > m:
        return AlternatingForm.zero(m, p + q)
    if p == 0:
        return AlternatingForm(m, q, a.coeffs[0] * b.coeffs)
    if q == 0:
        return AlternatingForm(m, p, b.coeffs[0] * a.coeffs)
    ia, ib, ic, sg = _wedge_table(m, p, q)
    c = np.zeros(math.comb(m, p + q))
    np.add.at(c, ic, sg * a.coeffs[ia] * b.coeffs[ib])
    return AlternatingForm(m, p + q, c)


def wedge_all(*forms: AlternatingForm) -> AlternatingForm:
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def as_columns(vs, dim: int | None = None) -> np.ndarray:
    """Stack a list of vectors (or an (m, k) array) as an (m, k) float array."""
    if isinstance(vs, np.ndarray) and vs.ndim == 2:
        mat = np.asarray(vs, dtype=np.float64)
    else:
        vs = list(vs)
        if not vs:
            return np.zeros((dim or 0, 0))
        mat = np.column_stack([np.asarray(v, dtype=np.float64).reshape(-1) for v in vs])
    if dim is not None and mat.shape[0] != dim:
        raise InputError(f"vectors have dimension {mat.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(mat)):
        raise InputError("vector components must be finite")
    return mat


def evaluate(f: AlternatingForm, vs) -> float:
    """f(v_1, ..., v_k)."""
    mat = as_columns(vs, f.dim)
    if mat.shape[1] != f.degree:
        raise InputError(f"degree-{f.degree} form evaluated on {mat.shape[1]} vectors")
    if f.degree == 0:
        return float(f.coeffs[0])
    return float(kernels.eval_batch(f.coeffs[None, :], multi_indices(f.dim, f.degree), mat[None])[0, 0])


def evaluate_many(forms: Sequence[AlternatingForm], tuples: np.ndarray) -> np.ndarray:
    """Evaluate same-degree forms on a batch of k-tuples.

    ``tuples`` has shape (B, m, k); the result has shape (F, B).
    """
    if not forms:
        return np.zeros((0, tuples.shape[0]))
    m, k = forms[0].dim, forms[0].degree
    if any(f.dim != m or f.degree != k for f in forms):
        raise InputError("evaluate_many needs forms of a common dim and degree")
    tuples = np.asarray(tuples, dtype=np.float64)
    if tuples.ndim != 3 or tuples.shape[1] != m or tuples.shape[2] != k:
        raise InputError(f"expected tuples of shape (B, {m}, {k}), got {tuples.shape}")
    coeffs = np.vstack([f.coeffs for f in forms])
    if k == 0:
        return np.repeat(coeffs, tuples.shape[0], axis=1)
    return kernels.eval_batch(coeffs, multi_indices(m, k), tuples)


def rank_of_vectors(mat: np.ndarray, rtol: float = 1e-10) -> int:
    if mat.size == 0:
        return 0
    s = np.linalg.svd(mat, compute_uv=False)
    return int(np.sum(s > rtol * max(s[0], 1e-300))) if s[0] > 0 else 0


def restrict(f: AlternatingForm, basis) -> AlternatingForm:
    """The pullback of ``f`` to span(basis), written in the given basis."""
    mat = as_columns(basis, f.dim)
    j = mat.shape[1]
    if j == 0:
        raise InputError("restriction to the zero subspace")
    if rank_of_vectors(mat) < j:
        raise InputError("restriction basis is linearly dependent")
    if f.degree > j:
        return AlternatingForm.zero(j, f.degree)
    if f.degree == 0:
        return AlternatingForm.scalar(j, float(f.coeffs[0]))
    subsets = multi_indices(j, f.degree)
    tuples = mat[:, subsets].transpose(1, 0, 2)  # (C(j,k), m, k)
    vals = evaluate_many([f], tuples)[0]
    return AlternatingForm(j, f.degree, vals)


def interior(f: AlternatingForm, ws) -> AlternatingForm:
    """The form u -> f(w_1, ..., w_r, u_1, ..., u_{k-r})."""
    mat = as_columns(ws, f.dim)
    r = mat.shape[1]
    if r > f.degree:
        raise InputError(f"cannot insert {r} vectors into a degree-{f.degree} form")
    if r == 0:
        return f
    k = f.degree - r
    m = f.dim
    slots = multi_indices(m, k)
    eye = np.eye(m)
    tuples = np.empty((slots.shape[0], m, f.degree))
    tuples[:, :, :r] = mat[None, :, :]
    if k:
        tuples[:, :, r:] = eye[:, slots].transpose(1, 0, 2)
    vals = evaluate_many([f], tuples)[0]
    return AlternatingForm(m, k, vals)
