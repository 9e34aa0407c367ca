"""Brute-force reference implementations, independent of edslab internals.

Forms are plain dicts {increasing index tuple: coefficient}.
"""
import itertools
import math

import numpy as np


def perm_sign(perm):
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


def leibniz_det(mat):
    """Determinant by the permutation expansion."""
    k = len(mat)
    total = 0.0
    for perm in itertools.permutations(range(k)):
        term = perm_sign(perm)
        for r in range(k):
            term *= mat[r][perm[r]]
        total += term
    return total


def eval_form(terms, vecs):
    """sum_I c_I det(v_j[I_i])."""
    total = 0.0
    for idx, c in terms.items():
        total += c * leibniz_det([[v[i] for v in vecs] for i in idx])
    return total


def eval_wedge(a_terms, p, b_terms, q, vecs):
    """(a ^ b)(v_1..v_{p+q}) by the full shuffle sum over permutations."""
    cache_a, cache_b = {}, {}

    def ev(cache, terms, idx):
        # the oracle's own determinant is alternating, so cache on the sorted subset
        key = tuple(sorted(idx))
        if key not in cache:
            cache[key] = eval_form(terms, [vecs[i] for i in key])
        return perm_sign(idx) * cache[key]

    total = 0.0
    for perm in itertools.permutations(range(p + q)):
        total += perm_sign(perm) * ev(cache_a, a_terms, perm[:p]) * ev(cache_b, b_terms, perm[p:])
    return total / (math.factorial(p) * math.factorial(q))


def random_terms(rng, m, k):
    return {idx: float(rng.standard_normal()) for idx in itertools.combinations(range(m), k)}


def fd_jacobian(fun, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((fun(x + e) - fun(x - e)) / (2 * h))
    return np.column_stack(cols)
