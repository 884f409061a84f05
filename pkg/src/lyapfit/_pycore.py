"""Pure numpy implementations of the hot loops.

Each function mirrors one in ``_ext.pyx``. A radial profile is a tuple
``(n, q, factor)`` standing for ``factor * (1 - s)**n * q(s)`` on ``s < 1``
(zero elsewhere), with ``q`` an ascending float coefficient array.
"""

import numpy as np

_CHUNK = 512


def profile(s, n, q, factor):
    s = np.asarray(s, dtype=float)
    t = np.clip(1.0 - s, 0.0, None)
    acc = np.zeros_like(s)
    for coef in q[::-1]:
        acc = acc * s + coef
    return np.where(s < 1.0, factor * t**n * acc, 0.0)


def _diff(X, Y):
    diff = X[:, None, :] - Y[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    return diff, r


def kernel_matrix(X, Y, c, prof):
    _, r = _diff(X, Y)
    return profile(c * r, *prof)


def orbital_gram(Q, V, c, prof1, prof2):
    diff, r = _diff(Q, Q)
    s = c * r
    p1 = profile(s, *prof1)
    p2 = profile(s, *prof2)
    a = np.einsum("ijk,ik->ij", diff, V)  # <q_i - q_j, v_i>
    b = np.einsum("ijk,jk->ij", diff, V)  # <q_i - q_j, v_j>
    return -p2 * a * b - p1 * (V @ V.T)


def orbital_cross(X, Q, V, c, prof1):
    diff, r = _diff(X, Q)
    p1 = profile(c * r, *prof1)
    return -p1 * np.einsum("ijk,jk->ij", diff, V)


def expansion(X, Q, V, b, G, g, c, prof0, prof1, prof2, grad):
    n, d = X.shape
    vals = np.zeros(n)
    grads = np.zeros((n, d)) if grad else None
    for lo in range(0, n, _CHUNK):
        x = X[lo:lo + _CHUNK]
        if len(Q):
            diff, r = _diff(x, Q)
            s = c * r
            p1 = profile(s, *prof1)
            dv = np.einsum("ijk,jk->ij", diff, V)
            vals[lo:lo + _CHUNK] += (-p1 * dv) @ b
            if grad:
                p2 = profile(s, *prof2)
                grads[lo:lo + _CHUNK] -= np.einsum("ij,ijk->ik", p2 * dv * b, diff)
                grads[lo:lo + _CHUNK] -= (p1 * b) @ V
        if len(G):
            diff, r = _diff(x, G)
            s = c * r
            vals[lo:lo + _CHUNK] += profile(s, *prof0) @ g
            if grad:
                p1 = profile(s, *prof1)
                grads[lo:lo + _CHUNK] += np.einsum("ij,ijk->ik", p1 * g, diff)
    return vals, grads


def nearest_counts(samples, sites):
    m = len(sites)
    counts = np.zeros(m, dtype=np.int64)
    for lo in range(0, len(samples), 1024):
        x = samples[lo:lo + 1024]
        # argmin returns the first minimiser, so ties go to the lowest index
        d2 = ((x[:, None, :] - sites[None, :, :]) ** 2).sum(axis=2)
        counts += np.bincount(np.argmin(d2, axis=1), minlength=m)
    return counts
