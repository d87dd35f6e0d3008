# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels.

conjugate_lines
    Discrete Legendre-Fenchel transform of many sampled lines at once,
    using the linear-time algorithm: lower convex hull of the samples,
    then a merge of hull-edge slopes against the sorted slope grid.
"""

import numpy as np

from libc.stdlib cimport malloc, free
from libc.stdint cimport int64_t
from libc.math cimport sqrt, fabs


cdef void _llt(const double* f, const double* x, Py_ssize_t n,
               const double* s, Py_ssize_t m, double* out,
               Py_ssize_t* hull) noexcept nogil:
    cdef Py_ssize_t h = 0, j, k, i
    cdef Py_ssize_t a, b
    # lower convex hull (monotone chain), x increasing
    for j in range(n):
        while h >= 2:
            a = hull[h - 2]
            b = hull[h - 1]
            if (f[b] - f[a]) * (x[j] - x[b]) >= (f[j] - f[b]) * (x[b] - x[a]):
                h -= 1
            else:
                break
        hull[h] = j
        h += 1
    # merge: vertex i is optimal while s lies between its edge slopes
    i = 0
    for k in range(m):
        while i < h - 1 and (f[hull[i + 1]] - f[hull[i]]) < s[k] * (x[hull[i + 1]] - x[hull[i]]):
            i += 1
        out[k] = s[k] * x[hull[i]] - f[hull[i]]


def conjugate_lines(const double[:, ::1] f, const double[::1] x,
                    const double[::1] s, double[:, ::1] out):
    """``out[l, k] = max_j (s[k] x[j] - f[l, j])`` for every line ``l``.

    ``x`` and ``s`` must be strictly increasing.
    """
    cdef Py_ssize_t nlines = f.shape[0], n = f.shape[1], m = s.shape[0], l
    if x.shape[0] != n or out.shape[0] != nlines or out.shape[1] != m:
        raise ValueError("shape mismatch")
    cdef Py_ssize_t* hull = <Py_ssize_t*> malloc(n * sizeof(Py_ssize_t))
    if hull == NULL:
        raise MemoryError()
    try:
        with nogil:
            for l in range(nlines):
                _llt(&f[l, 0], &x[0], n, &s[0], m, &out[l, 0], hull)
    finally:
        free(hull)


def assemble_builtin(int kind, double lam, double beta,
                     const double[:, ::1] u, const int64_t[:, ::1] tri,
                     const double[:, :, ::1] dm_inv, const double[::1] area,
                     double[:, ::1] grad_out):
    """Energy and vertex gradient for the built-in densities plus penalty.

    kind 0: Dirichlet ``|G|^2 / 2``; kind 1: two-well squared distance.
    Returns ``(stored_energy, penalty_energy, max |det G - 1|)``; ``grad_out``
    receives the gradient of ``stored + beta * penalty`` (accumulated, caller
    zeroes).
    """
    cdef Py_ssize_t t, ntri = tri.shape[0]
    cdef Py_ssize_t v0, v1, v2
    cdef double d00, d01, d10, d11, g00, g01, g10, g11
    cdef double e00, e01, e10, e11, w
    cdef double x1, x2, nx, r00, r10, p00, p01, p10, p11, dist0, dist1
    cdef double mu = 1.0 / lam
    cdef double det, stored = 0.0, penalty = 0.0, dens, worst = 0.0
    cdef double a00, a01, a10, a11, c0, c1
    with nogil:
        for t in range(ntri):
            v0 = tri[t, 0]
            v1 = tri[t, 1]
            v2 = tri[t, 2]
            d00 = u[v1, 0] - u[v0, 0]
            d10 = u[v1, 1] - u[v0, 1]
            d01 = u[v2, 0] - u[v0, 0]
            d11 = u[v2, 1] - u[v0, 1]
            g00 = d00 * dm_inv[t, 0, 0] + d01 * dm_inv[t, 1, 0]
            g01 = d00 * dm_inv[t, 0, 1] + d01 * dm_inv[t, 1, 1]
            g10 = d10 * dm_inv[t, 0, 0] + d11 * dm_inv[t, 1, 0]
            g11 = d10 * dm_inv[t, 0, 1] + d11 * dm_inv[t, 1, 1]
            w = area[t]
            if kind == 0:
                dens = 0.5 * (g00 * g00 + g01 * g01 + g10 * g10 + g11 * g11)
                e00 = g00
                e01 = g01
                e10 = g10
                e11 = g11
            else:
                # SO(2): rotation from the conformal part of G
                x1 = 0.5 * (g00 + g11)
                x2 = 0.5 * (g10 - g01)
                nx = sqrt(x1 * x1 + x2 * x2)
                if nx > 1e-12:
                    r00 = x1 / nx
                    r10 = x2 / nx
                else:
                    r00 = 1.0
                    r10 = 0.0
                a00 = g00 - r00
                a01 = g01 + r10
                a10 = g10 - r10
                a11 = g11 - r00
                dist0 = a00 * a00 + a01 * a01 + a10 * a10 + a11 * a11
                # SO(2) H: conformal part of G H^T = G diag(lam, mu)
                x1 = 0.5 * (g00 * lam + g11 * mu)
                x2 = 0.5 * (g10 * lam - g01 * mu)
                nx = sqrt(x1 * x1 + x2 * x2)
                if nx > 1e-12:
                    r00 = x1 / nx
                    r10 = x2 / nx
                else:
                    r00 = 1.0
                    r10 = 0.0
                p00 = g00 - r00 * lam
                p01 = g01 + r10 * mu
                p10 = g10 - r10 * lam
                p11 = g11 - r00 * mu
                dist1 = p00 * p00 + p01 * p01 + p10 * p10 + p11 * p11
                if dist1 < dist0:
                    dens = dist1
                    e00 = 2.0 * p00
                    e01 = 2.0 * p01
                    e10 = 2.0 * p10
                    e11 = 2.0 * p11
                else:
                    dens = dist0
                    e00 = 2.0 * a00
                    e01 = 2.0 * a01
                    e10 = 2.0 * a10
                    e11 = 2.0 * a11
            det = g00 * g11 - g01 * g10 - 1.0
            stored += w * dens
            penalty += w * det * det
            if fabs(det) > worst:
                worst = fabs(det)
            # d(det)/dG = cof G
            e00 = w * (e00 + 2.0 * beta * det * g11)
            e01 = w * (e01 - 2.0 * beta * det * g10)
            e10 = w * (e10 - 2.0 * beta * det * g01)
            e11 = w * (e11 + 2.0 * beta * det * g00)
            # dE/dD = dE/dG dm_inv^T
            c0 = e00 * dm_inv[t, 0, 0] + e01 * dm_inv[t, 0, 1]
            c1 = e00 * dm_inv[t, 1, 0] + e01 * dm_inv[t, 1, 1]
            grad_out[v1, 0] += c0
            grad_out[v2, 0] += c1
            grad_out[v0, 0] -= c0 + c1
            c0 = e10 * dm_inv[t, 0, 0] + e11 * dm_inv[t, 0, 1]
            c1 = e10 * dm_inv[t, 1, 0] + e11 * dm_inv[t, 1, 1]
            grad_out[v1, 1] += c0
            grad_out[v2, 1] += c1
            grad_out[v0, 1] -= c0 + c1
    return stored, penalty, worst
