"""Wendland compactly supported radial kernels.

The profile ``psi_{l,k}`` is built exactly with rational coefficients by the
recursion ``psi_{l,0}(r) = (1 - r)_+^l`` and
``psi_{l,k+1}(r) = int_r^1 t psi_{l,k}(t) dt``. Floating point enters only
when a profile is evaluated, and then through the factored form
``(1 - s)^n q(s)`` which avoids cancellation near the edge of the support.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import NamedTuple, Optional

import numpy as np

from . import _backend
from .errors import SmoothnessError

__all__ = [
    "WendlandKernel",
    "RadialDerivatives",
    "build_wendland",
    "kernel_eval",
    "radial_derivatives",
    "wendland_poly",
]


# -- exact polynomial helpers (ascending coefficient tuples of Fractions) ----

def _trim(p):
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return tuple(p)


def poly_eval(p, x):
    """Horner evaluation; exact when ``x`` is a Fraction."""
    acc = Fraction(0) if isinstance(x, Fraction) else 0.0
    for coef in reversed(p):
        acc = acc * x + coef
    return acc


def _deriv(p):
    return _trim([i * p[i] for i in range(1, len(p))] or [Fraction(0)])


def _div_by_r(p):
    if p[0] != 0:
        raise ZeroDivisionError("polynomial does not vanish at r = 0")
    return _trim(p[1:] or [Fraction(0)])


def _factor_one_minus_r(p):
    """Split ``p`` as ``(1 - r)^n q(r)`` with ``q(1) != 0``."""
    n = 0
    p = list(p)
    while len(p) > 1 and poly_eval(p, Fraction(1)) == 0:
        # synthetic division by (r - 1), then flip sign for (1 - r)
        out = [Fraction(0)] * (len(p) - 1)
        carry = Fraction(0)
        for i in range(len(p) - 1, 0, -1):
            carry = p[i] + carry
            out[i - 1] = carry
        p = [-c for c in out]
        n += 1
    return n, _trim(p)


def wendland_poly(l, k):
    """Exact coefficients of ``psi_{l,k}`` on ``[0, 1]``."""
    p = [Fraction(comb(l, j) * (-1) ** j) for j in range(l + 1)]
    for _ in range(k):
        tp = [Fraction(0)] + p
        anti = [Fraction(0)] + [tp[i] / (i + 1) for i in range(len(tp))]
        total = sum(anti)
        p = [total - anti[0]] + [-a for a in anti[1:]]
    return _trim(p)


class RadialProfile(NamedTuple):
    """``factor * (1 - s)^power * q(s)`` for ``s < 1``, zero otherwise."""

    power: int
    coeffs: np.ndarray
    factor: float

    def __call__(self, s):
        return _backend.profile(s, self.power, self.coeffs, self.factor)


class RadialDerivatives(NamedTuple):
    psi: object
    psi1: object
    psi2: object


@dataclass(frozen=True)
class WendlandKernel:
    """``K(x, y) = psi_{l,k}(c |x - y|)`` on ``R^d``.

    Parameters
    ----------
    d : int
        Spatial dimension.
    k : int
        Smoothness index; the kernel is ``C^{2k}``.
    c : float
        Scale (inverse support radius).
    l : int, optional
        Recursion index, defaults to ``d // 2 + k + 1``. Larger values are
        allowed and keep positive definiteness.
    """

    d: int
    k: int
    c: float = 1.0
    l: Optional[int] = None
    poly: tuple = field(init=False, repr=False, compare=False)
    psi1_poly: Optional[tuple] = field(init=False, repr=False, compare=False)
    psi2_poly: Optional[tuple] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.d < 1 or self.k < 0:
            raise ValueError(f"need d >= 1 and k >= 0, got d={self.d}, k={self.k}")
        if not self.c > 0:
            raise ValueError(f"scale c must be positive, got {self.c}")
        lmin = self.d // 2 + self.k + 1
        if self.l is None:
            object.__setattr__(self, "l", lmin)
        elif self.l < lmin:
            raise ValueError(f"l={self.l} below {lmin}; kernel not positive definite in R^{self.d}")
        object.__setattr__(self, "c", float(self.c))
        poly = wendland_poly(self.l, self.k)
        object.__setattr__(self, "poly", poly)
        p1 = p2 = None
        if self.k >= 1:
            p1 = _div_by_r(_deriv(poly))
            if self.k >= 2:
                p2 = _div_by_r(_deriv(p1))
        object.__setattr__(self, "psi1_poly", p1)
        object.__setattr__(self, "psi2_poly", p2)

    @property
    def support_radius(self):
        return 1.0 / self.c

    @property
    def kappa2(self):
        """``K(x, x) = psi(0)``."""
        return float(self.poly[0])

    def _profile(self, p, factor):
        n, q = _factor_one_minus_r(p)
        return RadialProfile(n, np.array([float(v) for v in q]), factor)

    @property
    def profiles(self):
        """Profiles for psi, psi1, psi2 in the scaled variable ``s = c r``.

        The factors carry the chain rule so that ``psi1(s)`` is
        ``(d/dr psi(c r)) / r`` and ``psi2(s)`` is ``(d/dr psi1) / r``.
        """
        cached = self.__dict__.get("_profiles")
        if cached is None:
            c2 = self.c * self.c
            cached = (
                self._profile(self.poly, 1.0),
                self._profile(self.psi1_poly, c2) if self.psi1_poly else None,
                self._profile(self.psi2_poly, c2 * c2) if self.psi2_poly else None,
            )
            self.__dict__["_profiles"] = cached
        return cached

    def __call__(self, x, y):
        return kernel_eval(self, x, y)

    def matrix(self, X, Y=None):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = X if Y is None else np.atleast_2d(np.asarray(Y, dtype=float))
        return _backend.kernel_matrix(X, Y, self.c, self.profiles[0])

    def to_dict(self):
        return {"d": self.d, "k": self.k, "c": self.c, "l": self.l}

    @classmethod
    def from_dict(cls, data):
        return cls(int(data["d"]), int(data["k"]), float(data["c"]), data.get("l"))


def build_wendland(d, k, c=1.0, l=None):
    return WendlandKernel(d, k, c, l)


def kernel_eval(K, x, y):
    """``psi_{l,k}(c |x - y|)``, broadcasting over leading axes."""
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    if K.d == 1 and diff.ndim == 0:
        r = abs(diff)
    else:
        r = np.sqrt(np.sum(diff * diff, axis=-1))
    out = K.profiles[0](K.c * np.asarray(r))
    return float(out) if np.ndim(out) == 0 else out


def radial_derivatives(K, r, order=None):
    """Values of psi, psi1 = psi'/r and psi2 = psi1'/r at distance ``r``.

    With these, ``grad_x K(x, y) = psi1 (x - y)`` and
    ``d^2 K / dx dy = -(psi2 (x - y)(x - y)^T + psi1 I)``.

    ``order`` caps the highest quotient returned (entries above it are
    None). It defaults to what the smoothness index supports; asking for
    more raises :class:`SmoothnessError`.
    """
    avail = min(K.k, 2)
    if order is None:
        order = avail
    if order > avail:
        raise SmoothnessError(
            f"psi{order} needs smoothness index k >= {order}, kernel has k={K.k}")
    s = K.c * np.asarray(r, dtype=float)
    if np.any(s < 0):
        raise ValueError("distance must be non-negative")
    prof = K.profiles
    vals = [prof[i](s) if i <= order else None for i in range(3)]
    vals = [float(v) if v is not None and np.ndim(v) == 0 else v for v in vals]
    return RadialDerivatives(*vals)
