# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the routines in ``_pycore``.

Signatures and semantics match ``_pycore`` exactly; see that module for the
radial profile convention.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


cdef inline double _prof(double s, int n, const double[::1] q, double factor) noexcept nogil:
    cdef double t, acc, p
    cdef Py_ssize_t i
    if s >= 1.0:
        return 0.0
    t = 1.0 - s
    acc = 0.0
    for i in range(q.shape[0] - 1, -1, -1):
        acc = acc * s + q[i]
    p = 1.0
    for i in range(n):
        p *= t
    return factor * p * acc


def profile(s, int n, q, double factor):
    cdef cnp.ndarray[double, ndim=1] flat = np.ascontiguousarray(s, dtype=float).ravel()
    cdef const double[::1] qv = np.ascontiguousarray(q, dtype=float)
    cdef cnp.ndarray[double, ndim=1] out = np.empty(flat.shape[0])
    cdef Py_ssize_t i
    for i in range(flat.shape[0]):
        out[i] = _prof(flat[i], n, qv, factor)
    return out.reshape(np.shape(s))


cdef inline double _dist(const double[:, ::1] X, Py_ssize_t i,
                         const double[:, ::1] Y, Py_ssize_t j) noexcept nogil:
    cdef double acc = 0.0, t
    cdef Py_ssize_t k
    for k in range(X.shape[1]):
        t = X[i, k] - Y[j, k]
        acc += t * t
    return sqrt(acc)


def kernel_matrix(X, Y, double c, prof):
    cdef const double[:, ::1] xv = np.ascontiguousarray(X, dtype=float)
    cdef const double[:, ::1] yv = np.ascontiguousarray(Y, dtype=float)
    cdef int n0 = prof[0]
    cdef const double[::1] q0 = np.ascontiguousarray(prof[1], dtype=float)
    cdef double f0 = prof[2]
    cdef Py_ssize_t i, j
    out = np.zeros((xv.shape[0], yv.shape[0]))
    cdef double[:, ::1] ov = out
    with nogil:
        for i in range(xv.shape[0]):
            for j in range(yv.shape[0]):
                ov[i, j] = _prof(c * _dist(xv, i, yv, j), n0, q0, f0)
    return out


def orbital_gram(Q, V, double c, prof1, prof2):
    cdef const double[:, ::1] qv = np.ascontiguousarray(Q, dtype=float)
    cdef const double[:, ::1] vv = np.ascontiguousarray(V, dtype=float)
    cdef int n1 = prof1[0], n2 = prof2[0]
    cdef const double[::1] q1 = np.ascontiguousarray(prof1[1], dtype=float)
    cdef const double[::1] q2 = np.ascontiguousarray(prof2[1], dtype=float)
    cdef double f1 = prof1[2], f2 = prof2[2]
    cdef Py_ssize_t M = qv.shape[0], d = qv.shape[1], i, j, k
    cdef double s, a, b, vij, dk, p1, p2
    out = np.zeros((M, M))
    cdef double[:, ::1] ov = out
    with nogil:
        for i in range(M):
            for j in range(i, M):
                s = c * _dist(qv, i, qv, j)
                if s >= 1.0:
                    continue
                a = 0.0
                b = 0.0
                vij = 0.0
                for k in range(d):
                    dk = qv[i, k] - qv[j, k]
                    a += dk * vv[i, k]
                    b += dk * vv[j, k]
                    vij += vv[i, k] * vv[j, k]
                p1 = _prof(s, n1, q1, f1)
                p2 = _prof(s, n2, q2, f2)
                ov[i, j] = -p2 * a * b - p1 * vij
                ov[j, i] = ov[i, j]
    return out


def orbital_cross(X, Q, V, double c, prof1):
    cdef const double[:, ::1] xv = np.ascontiguousarray(X, dtype=float)
    cdef const double[:, ::1] qv = np.ascontiguousarray(Q, dtype=float)
    cdef const double[:, ::1] vv = np.ascontiguousarray(V, dtype=float)
    cdef int n1 = prof1[0]
    cdef const double[::1] q1 = np.ascontiguousarray(prof1[1], dtype=float)
    cdef double f1 = prof1[2]
    cdef Py_ssize_t i, j, k, d = xv.shape[1]
    cdef double s, dv
    out = np.zeros((xv.shape[0], qv.shape[0]))
    cdef double[:, ::1] ov = out
    with nogil:
        for i in range(xv.shape[0]):
            for j in range(qv.shape[0]):
                s = c * _dist(xv, i, qv, j)
                if s >= 1.0:
                    continue
                dv = 0.0
                for k in range(d):
                    dv += (xv[i, k] - qv[j, k]) * vv[j, k]
                ov[i, j] = -_prof(s, n1, q1, f1) * dv
    return out


def expansion(X, Q, V, b, G, g, double c, prof0, prof1, prof2, bint grad):
    cdef const double[:, ::1] xv = np.ascontiguousarray(X, dtype=float)
    cdef const double[:, ::1] qv = np.ascontiguousarray(np.reshape(Q, (-1, xv.shape[1])), dtype=float)
    cdef const double[:, ::1] vv = np.ascontiguousarray(np.reshape(V, (-1, xv.shape[1])), dtype=float)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=float)
    cdef const double[:, ::1] gv = np.ascontiguousarray(np.reshape(G, (-1, xv.shape[1])), dtype=float)
    cdef const double[::1] gw = np.ascontiguousarray(g, dtype=float)
    cdef int n0 = prof0[0], n1 = prof1[0], n2 = prof2[0] if prof2 is not None else 0
    cdef const double[::1] q0 = np.ascontiguousarray(prof0[1], dtype=float)
    cdef const double[::1] q1 = np.ascontiguousarray(prof1[1], dtype=float)
    cdef const double[::1] q2 = np.ascontiguousarray(prof2[1] if prof2 is not None else [0.0], dtype=float)
    cdef double f0 = prof0[2], f1 = prof1[2], f2 = prof2[2] if prof2 is not None else 0.0
    cdef Py_ssize_t n = xv.shape[0], d = xv.shape[1], i, j, k
    cdef double s, dv, p1, p2, w
    vals = np.zeros(n)
    grads = np.zeros((n, d))
    cdef double[::1] ov = vals
    cdef double[:, ::1] og = grads
    with nogil:
        for i in range(n):
            for j in range(qv.shape[0]):
                s = c * _dist(xv, i, qv, j)
                if s >= 1.0:
                    continue
                dv = 0.0
                for k in range(d):
                    dv += (xv[i, k] - qv[j, k]) * vv[j, k]
                p1 = _prof(s, n1, q1, f1)
                ov[i] -= bv[j] * p1 * dv
                if grad:
                    p2 = _prof(s, n2, q2, f2)
                    w = bv[j] * p2 * dv
                    for k in range(d):
                        og[i, k] -= w * (xv[i, k] - qv[j, k]) + bv[j] * p1 * vv[j, k]
            for j in range(gv.shape[0]):
                s = c * _dist(xv, i, gv, j)
                if s >= 1.0:
                    continue
                ov[i] += gw[j] * _prof(s, n0, q0, f0)
                if grad:
                    p1 = _prof(s, n1, q1, f1)
                    for k in range(d):
                        og[i, k] += gw[j] * p1 * (xv[i, k] - gv[j, k])
    return vals, (grads if grad else None)


def nearest_counts(samples, sites):
    cdef const double[:, ::1] sv = np.ascontiguousarray(samples, dtype=float)
    cdef const double[:, ::1] xv = np.ascontiguousarray(sites, dtype=float)
    cdef Py_ssize_t n = sv.shape[0], m = xv.shape[0], d = sv.shape[1], i, j, k, best
    cdef double dmin, acc, t
    counts = np.zeros(m, dtype=np.int64)
    cdef long long[::1] cv = counts
    with nogil:
        for i in range(n):
            best = 0
            dmin = 1e300
            for j in range(m):
                acc = 0.0
                for k in range(d):
                    t = sv[i, k] - xv[j, k]
                    acc += t * t
                if acc < dmin:
                    dmin = acc
                    best = j
            cv[best] += 1
    return counts
