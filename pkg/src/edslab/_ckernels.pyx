# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels in ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

cdef enum:
    MAXK = 24


cdef double _det(double* a, int k) noexcept nogil:
    # in-place LU with partial pivoting on a row-major k x k buffer
    cdef int i, j, r, piv
    cdef double det = 1.0, best, tmp, f
    for i in range(k):
        piv = i
        best = fabs(a[i * k + i])
        for r in range(i + 1, k):
            if fabs(a[r * k + i]) > best:
                best = fabs(a[r * k + i])
                piv = r
        if best == 0.0:
            return 0.0
        if piv != i:
            for j in range(k):
                tmp = a[i * k + j]
                a[i * k + j] = a[piv * k + j]
                a[piv * k + j] = tmp
            det = -det
        det *= a[i * k + i]
        for r in range(i + 1, k):
            f = a[r * k + i] / a[i * k + i]
            for j in range(i + 1, k):
                a[r * k + j] -= f * a[i * k + j]
    return det


def eval_batch(coeffs, combos, vecs):
    cdef const double[:, ::1] cf = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef const cnp.intp_t[:, ::1] cb = np.ascontiguousarray(combos, dtype=np.intp)
    cdef const double[:, :, ::1] v = np.ascontiguousarray(vecs, dtype=np.float64)
    cdef Py_ssize_t nf = cf.shape[0], nc = cb.shape[0], k = cb.shape[1]
    cdef Py_ssize_t nb = v.shape[0]
    if k > MAXK:
        raise ValueError("form degree too large for compiled kernel")
    out = np.zeros((nf, nb), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double[:] minors = np.empty(nc, dtype=np.float64)
    cdef double buf[MAXK * MAXK]
    cdef Py_ssize_t b, c, f, i, j
    cdef cnp.intp_t r0, r1, r2
    cdef double acc
    with nogil:
        for b in range(nb):
            for c in range(nc):
                if k == 1:
                    minors[c] = v[b, cb[c, 0], 0]
                elif k == 2:
                    r0 = cb[c, 0]
                    r1 = cb[c, 1]
                    minors[c] = v[b, r0, 0] * v[b, r1, 1] - v[b, r0, 1] * v[b, r1, 0]
                elif k == 3:
                    r0 = cb[c, 0]
                    r1 = cb[c, 1]
                    r2 = cb[c, 2]
                    minors[c] = (
                        v[b, r0, 0] * (v[b, r1, 1] * v[b, r2, 2] - v[b, r1, 2] * v[b, r2, 1])
                        - v[b, r0, 1] * (v[b, r1, 0] * v[b, r2, 2] - v[b, r1, 2] * v[b, r2, 0])
                        + v[b, r0, 2] * (v[b, r1, 0] * v[b, r2, 1] - v[b, r1, 1] * v[b, r2, 0])
                    )
                else:
                    for i in range(k):
                        for j in range(k):
                            buf[i * k + j] = v[b, cb[c, i], j]
                    minors[c] = _det(buf, <int>k)
            for f in range(nf):
                acc = 0.0
                for c in range(nc):
                    acc += cf[f, c] * minors[c]
                o[f, b] = acc
    return out


def point_frames(z):
    cdef const double[:, ::1] zz = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t n = zz.shape[0], i, ip, im
    t = np.empty((n, 2), dtype=np.float64)
    jt = np.empty((n, 2), dtype=np.float64)
    cdef double[:, ::1] tv = t
    cdef double[:, ::1] jv = jt
    cdef double fx, fy, bx, by, lf, lb, nx, ny, nn
    for i in range(n):
        ip = i + 1 if i + 1 < n else 0
        im = i - 1 if i > 0 else n - 1
        fx = zz[i, 0] - zz[ip, 0]
        fy = zz[i, 1] - zz[ip, 1]
        bx = zz[i, 0] - zz[im, 0]
        by = zz[i, 1] - zz[im, 1]
        lf = sqrt(fx * fx + fy * fy)
        lb = sqrt(bx * bx + by * by)
        if lf == 0.0 or lb == 0.0:
            raise ValueError("consecutive vertices coincide")
        nx = fx / lf - bx / lb
        ny = fy / lf - by / lb
        nn = sqrt(nx * nx + ny * ny)
        if nn == 0.0:
            raise ValueError("N_i vanishes")
        tv[i, 0] = nx / nn
        tv[i, 1] = ny / nn
        jv[i, 0] = -ny / nn
        jv[i, 1] = nx / nn
    return t, jt
