"""Weighted regularized least squares reconstruction of a vector field.

Each component ``f^k`` is approximated by ``sum_i a_i K(., x_i)`` where the
coefficients solve ``(A D_w A + lam A) a = A D_w y^k``; ``A`` is the Gram
matrix of the sites and ``D_w`` the diagonal of Voronoi weights.
"""

import hashlib
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.linalg as la
from scipy.linalg import lapack

from .errors import SolverError
from .geometry import check_distinct, weigh_sites
from .kernel import WendlandKernel

RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class SampleSet:
    x: np.ndarray
    y: np.ndarray
    w: Optional[np.ndarray] = None
    h_x: Optional[float] = None
    sigma: Optional[float] = None

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=float))
        y = np.asarray(self.y, dtype=float).reshape(x.shape[0], -1)
        if len(x) < 1:
            raise ValueError("need at least one sample")
        if y.shape != x.shape:
            raise ValueError(f"sites {x.shape} and values {y.shape} do not match")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.w is not None:
            w = np.asarray(self.w, dtype=float)
            # a Monte Carlo cell estimate can be zero for a tiny cell
            if w.shape != (len(x),) or np.any(w < 0) or not w.sum() > 0:
                raise ValueError("weights must be non-negative with a positive sum, one per site")
            object.__setattr__(self, "w", w)

    @property
    def m(self):
        return self.x.shape[0]

    @property
    def d(self):
        return self.x.shape[1]

    @property
    def w_norm(self):
        return float(np.linalg.norm(self.w))

    def with_geometry(self, X, n_mc=None, seed=0, n_candidates=None):
        ws = weigh_sites(self.x, X, n_mc=n_mc, seed=seed, n_candidates=n_candidates)
        return replace(self, w=ws.w, h_x=ws.h_x)

    def digest(self):
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.x).tobytes())
        h.update(np.ascontiguousarray(self.y).tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class VectorFieldModel:
    kernel: WendlandKernel
    centers: np.ndarray
    coeffs: np.ndarray  # shape (m, d): column k holds the coefficients of component k
    lam: float
    provenance: dict = field(default_factory=dict, compare=False)

    @property
    def d(self):
        return self.centers.shape[1]

    def __call__(self, x):
        return eval_vf(self, x)

    def to_dict(self):
        return {
            "kernel": self.kernel.to_dict(),
            "centers": self.centers.tolist(),
            "coeffs": self.coeffs.T.tolist(),
            "lambda": self.lam,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            WendlandKernel.from_dict(data["kernel"]),
            np.asarray(data["centers"], dtype=float),
            np.asarray(data["coeffs"], dtype=float).T.copy(),
            float(data["lambda"]),
            dict(data.get("provenance", {})),
        )


def choose_lambda(w_norm, h_x, r=1.0, delta=None):
    """``lam = max(|w|, h_x^(2/(3-2r)))^(2/(2r+1))``.

    ``delta`` only enters the probabilistic error bound, not the value, and
    is accepted so callers can pass the full rule inputs.
    """
    if not 0.5 < r <= 1.0:
        raise ValueError(f"source exponent r must lie in (1/2, 1], got {r}")
    if delta is not None and not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if w_norm < 0 or h_x < 0:
        raise ValueError("w_norm and h_x must be non-negative")
    base = max(w_norm, h_x ** (2.0 / (3.0 - 2.0 * r)))
    return base ** (2.0 / (2.0 * r + 1.0))


def _solve(A, w, lam, Y, solver):
    m = len(w)
    if solver == "lu":
        M = w[:, None] * A + lam * np.eye(m)
        lu, piv, info = lapack.dgetrf(M)
        rcond = lapack.dgecon(lu, np.abs(M).sum(axis=0).max(), norm="1")[0] if info == 0 else 0.0
        if info != 0 or rcond < 1e2 * np.finfo(float).eps:
            raise SolverError("regression system is numerically singular; "
                              "increase lambda or shrink the kernel support",
                              condition=np.inf if rcond == 0 else 1 / rcond)
        return la.lu_solve((lu, piv), w[:, None] * Y), 1.0 / rcond
    if solver == "cholesky":
        M = A @ (w[:, None] * A) + lam * A
        try:
            cf = la.cho_factor(M)
        except la.LinAlgError:
            raise SolverError("symmetric normal equations are not positive definite; "
                              "increase lambda or shrink the kernel support",
                              condition=np.linalg.cond(M)) from None
        return la.cho_solve(cf, A @ (w[:, None] * Y)), None
    raise ValueError(f"unknown solver {solver!r}")


def fit_vector_field(z, kernel, lam, solver="lu", provenance=None):
    """Fit every component of the field to the weighted samples ``z``.

    ``solver="lu"`` factors ``D_w A + lam I`` once (same solution when ``A``
    is invertible, much better conditioned); ``"cholesky"`` factors the
    symmetric normal matrix ``A D_w A + lam A``. Both are checked against
    the symmetric normal equations.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if z.w is None:
        raise ValueError("sample set has no Voronoi weights; call with_geometry first")
    if kernel.d != z.d:
        raise ValueError(f"kernel dimension {kernel.d} != data dimension {z.d}")
    check_distinct(z.x)
    A = kernel.matrix(z.x)
    coeffs, cond = _solve(A, z.w, lam, z.y, solver)

    rhs = A @ (z.w[:, None] * z.y)
    res = A @ (z.w[:, None] * (A @ coeffs)) + lam * (A @ coeffs) - rhs
    res_norm = np.linalg.norm(res, axis=0)
    rhs_norm = np.linalg.norm(rhs, axis=0)
    rel = float(np.max(res_norm / np.where(rhs_norm > 0, rhs_norm, 1.0)))
    if np.any(res_norm > RESIDUAL_TOL * rhs_norm + 1e-300):
        raise SolverError(f"normal-equation residual {rel:.2e} exceeds {RESIDUAL_TOL:g}",
                          condition=cond)

    prov = {
        "solver": solver,
        "residual": rel,
        "w_norm": z.w_norm,
        "h_x": z.h_x,
        "sigma": z.sigma,
        "dataset_sha256": z.digest(),
        "m": z.m,
    }
    if cond is not None:
        prov["condition"] = cond
    prov.update(provenance or {})
    return VectorFieldModel(kernel, z.x.copy(), coeffs, float(lam), prov)


def fit_noise_free(x, fstar, kernel, lam, w, solver="lu"):
    """Same fit with exact values ``y_i = f*(x_i)`` (the noise-free reference)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(fstar(x), dtype=float).reshape(x.shape)
    return fit_vector_field(SampleSet(x, y, w=w), kernel, lam, solver=solver)


def eval_vf(model, x):
    """Field value(s) at ``x``; a single point gives a ``(d,)`` vector."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1 and (model.d > 1 or x.size == 1)
    if model.d == 1 and x.ndim == 1 and x.size > 1:
        x = x[:, None]
    X = np.atleast_2d(x)
    out = model.kernel.matrix(X, model.centers) @ model.coeffs
    return out[0] if single else out
