"""Generalized Hermite interpolants for the Lyapunov equations.

Given a field ``f`` and collocation points ``q_i``, the orbital-derivative
functionals ``u -> <grad u(q_i), f(q_i)>`` and (for ``T``) point
evaluations on the hypersurface define a symmetric positive definite
collocation system. ``V`` solves ``<grad V, f> = -p`` and ``T`` solves
``<grad T, f> = -cbar`` with ``T = xi_T`` on the hypersurface.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
import scipy.linalg as la

from . import _backend
from .errors import SmallFieldError, SolverError
from .geometry import check_distinct
from .kernel import WendlandKernel

FIELD_THRESHOLD = 1e-8
JITTER = 1e-12


@dataclass(frozen=True)
class PFunction:
    """Quadratic form ``p(x) = (x - xbar)^T Q (x - xbar)``; ``Q`` defaults to I."""

    xbar: tuple
    Q: Optional[np.ndarray] = None

    def __post_init__(self):
        xbar = tuple(float(v) for v in np.atleast_1d(self.xbar))
        object.__setattr__(self, "xbar", xbar)
        Q = np.eye(len(xbar)) if self.Q is None else np.atleast_2d(np.asarray(self.Q, dtype=float))
        if Q.shape != (len(xbar), len(xbar)) or not np.allclose(Q, Q.T):
            raise ValueError("Q must be a symmetric d x d matrix")
        if np.linalg.eigvalsh(Q).min() <= 0:
            raise ValueError("Q must be positive definite")
        object.__setattr__(self, "Q", Q)

    def __call__(self, x):
        y = np.atleast_2d(x) - np.asarray(self.xbar)
        return np.einsum("ij,jk,ik->i", y, self.Q, y)

    def to_dict(self):
        return {"form": "quadratic", "xbar": list(self.xbar), "Q": self.Q.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(data["xbar"], data.get("Q"))


@dataclass(frozen=True)
class OrbitalFunctional:
    q: np.ndarray
    v: Optional[np.ndarray]
    kind: str  # "orbital" or "point"


def _field_values(field_, q):
    v = np.asarray(field_(q), dtype=float).reshape(q.shape)
    return v


def _screen(q, v):
    norms = np.linalg.norm(v, axis=1)
    bad = np.flatnonzero(norms < FIELD_THRESHOLD)
    if len(bad):
        raise SmallFieldError(
            f"field magnitude below {FIELD_THRESHOLD:g} at collocation points {bad.tolist()}; "
            "move them away from the equilibrium (larger eps) or use denser data", bad)


def _points(q, d=None):
    q = np.asarray(q, dtype=float)
    if q.ndim == 1:
        q = q[:, None] if d in (None, 1) else q[None, :]
    return q


@dataclass(frozen=True)
class LyapunovModel:
    mode: str
    kernel: WendlandKernel
    points: np.ndarray
    field_values: np.ndarray
    gamma_points: np.ndarray
    coeffs: np.ndarray
    rhs: np.ndarray
    pfun: Optional[PFunction] = None
    cbar: Optional[float] = None
    xiT: Optional[Union[float, Callable]] = None
    provenance: dict = field(default_factory=dict, compare=False)

    @property
    def M(self):
        return len(self.points)

    @property
    def N(self):
        return len(self.gamma_points)

    @property
    def functionals(self):
        out = [OrbitalFunctional(q, v, "orbital") for q, v in zip(self.points, self.field_values)]
        out += [OrbitalFunctional(q, None, "point") for q in self.gamma_points]
        return out

    def _expand(self, x, grad):
        X = _points(x, self.kernel.d)
        b = self.coeffs[: self.M]
        g = self.coeffs[self.M:]
        p0, p1, p2 = self.kernel.profiles
        return _backend.expansion(X, self.points, self.field_values, b,
                                  self.gamma_points.reshape(-1, self.kernel.d), g,
                                  self.kernel.c, p0, p1, p2, grad)

    def __call__(self, x):
        return eval_lyap(self, x)

    def gradient(self, x):
        return self._expand(x, True)[1]

    def collocation_residuals(self):
        """``L s(q_i) - beta_i`` for every functional, using the stored field values."""
        lhs = np.einsum("ij,ij->i", self.gradient(self.points), self.field_values)
        out = lhs - self.rhs[: self.M]
        if self.N:
            out = np.concatenate([out, eval_lyap(self, self.gamma_points) - self.rhs[self.M:]])
        return out

    def to_dict(self):
        data = {
            "mode": self.mode,
            "kernel": self.kernel.to_dict(),
            "points": self.points.tolist(),
            "field_values": self.field_values.tolist(),
            "gamma_points": self.gamma_points.tolist(),
            "coeffs": self.coeffs.tolist(),
            "rhs": self.rhs.tolist(),
            "provenance": self.provenance,
        }
        if self.pfun is not None:
            data["pfun"] = self.pfun.to_dict()
        if self.cbar is not None:
            data["cbar"] = self.cbar
        if self.xiT is not None and not callable(self.xiT):
            data["xiT"] = self.xiT
        return data

    @classmethod
    def from_dict(cls, data):
        K = WendlandKernel.from_dict(data["kernel"])
        d = K.d
        return cls(
            data["mode"], K,
            np.asarray(data["points"], dtype=float).reshape(-1, d),
            np.asarray(data["field_values"], dtype=float).reshape(-1, d),
            np.asarray(data.get("gamma_points", []), dtype=float).reshape(-1, d),
            np.asarray(data["coeffs"], dtype=float),
            np.asarray(data["rhs"], dtype=float),
            PFunction.from_dict(data["pfun"]) if "pfun" in data else None,
            data.get("cbar"), data.get("xiT"),
            dict(data.get("provenance", {})),
        )


def assemble_B(q, vf, K2):
    """Orbital-derivative Gram matrix ``<v_i, d^2K/dxdy (q_i, q_j) v_j>``
    with ``v_i = vf(q_i)``."""
    return _assemble(_points(q, K2.d), vf, K2)[0]


def _assemble(q, vf, K2):
    if K2.k < 2:
        raise ValueError("orbital collocation needs a kernel with smoothness index k >= 2")
    check_distinct(q)
    v = _field_values(vf, q)
    _screen(q, v)
    _, p1, p2 = K2.profiles
    return _backend.orbital_gram(q, v, K2.c, p1, p2), v


def _spd_solve(Mat, rhs):
    """Cholesky solve with a single jittered retry; returns (x, jitter)."""
    try:
        return la.cho_solve(la.cho_factor(Mat), rhs), 0.0
    except la.LinAlgError:
        pass
    jitter = JITTER * np.trace(Mat) / len(Mat)
    try:
        cf = la.cho_factor(Mat + jitter * np.eye(len(Mat)))
    except la.LinAlgError:
        raise SolverError("collocation matrix is ill-conditioned even after jitter; "
                          "use coarser collocation points or a larger kernel support",
                          condition=np.linalg.cond(Mat)) from None
    return la.cho_solve(cf, rhs), jitter


def fit_V(q, vf, K2, p=None, xbar=None):
    """Interpolant with ``<grad V(q_i), f(q_i)> = -p(q_i)``.

    ``p`` defaults to ``|x - xbar|^2``.
    """
    q = _points(q, K2.d)
    if p is None:
        if xbar is None:
            raise ValueError("need p or xbar")
        p = PFunction(xbar)
    B, v = _assemble(q, vf, K2)
    beta = -np.asarray(p(q), dtype=float)
    b, jitter = _spd_solve(B, beta)
    prov = {"M": len(q), "jitter": jitter}
    return LyapunovModel("V", K2, q, v, np.zeros((0, K2.d)), b, beta,
                         pfun=p if isinstance(p, PFunction) else None, provenance=prov)


def fit_T(q, qtilde, vf, K2, cbar=1.0, xiT=0.0):
    """Interpolant with ``<grad T(q_i), f(q_i)> = -cbar`` and ``T = xi_T`` on the
    hypersurface points ``qtilde``. ``xiT`` is a constant or a callable.
    """
    q = _points(q, K2.d)
    qt = _points(qtilde, K2.d)
    if len(q) < 1:
        raise ValueError("T-mode needs at least one interior collocation point")
    if len(qt) < 1:
        raise ValueError("T-mode needs at least one hypersurface point")
    if not cbar > 0:
        raise ValueError("cbar must be positive")
    check_distinct(np.vstack([q, qt]))
    C, v = _assemble(q, vf, K2)
    p0, p1, _ = K2.profiles
    # D[i, j] = orbital functional i applied to K(qt_j, .)
    D = _backend.orbital_cross(qt, q, v, K2.c, p1).T
    C0 = K2.matrix(qt)
    full = np.block([[C, D], [D.T, C0]])
    xi = np.asarray(xiT(qt) if callable(xiT) else np.full(len(qt), float(xiT)), dtype=float)
    beta = np.concatenate([np.full(len(q), -float(cbar)), xi])
    c, jitter = _spd_solve(full, beta)
    prov = {"M": len(q), "N": len(qt), "jitter": jitter}
    return LyapunovModel("T", K2, q, v, qt, c, beta, cbar=float(cbar), xiT=xiT,
                         provenance=prov)


def eval_lyap(model, x):
    vals = model._expand(x, False)[0]
    x = np.asarray(x, dtype=float)
    single = x.ndim == 0 or (x.ndim == 1 and model.kernel.d > 1)
    return float(vals[0]) if single else vals


def orbital_derivative(model, field_, x):
    """``<grad s(x), field(x)>`` with the analytic expansion gradient."""
    X = _points(x, model.kernel.d)
    g = model.gradient(X)
    f = np.asarray(field_(X), dtype=float).reshape(X.shape)
    out = np.einsum("ij,ij->i", g, f)
    x = np.asarray(x, dtype=float)
    single = x.ndim == 0 or (x.ndim == 1 and model.kernel.d > 1)
    return float(out[0]) if single else out
