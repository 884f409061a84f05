"""Reference systems, synthetic noisy data and independent oracles.

The oracles do not touch the kernel machinery: ``oracle_V_quadratic``
solves a Lyapunov matrix equation, the flow oracles integrate trajectories
with classical RK4.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import NoCrossingError, NotInBasinError
from .geometry import Box
from .vfield import SampleSet

RK4_STEP = 1e-3
TAIL_TOL = 1e-5
BISECT_TOL = 1e-10


@dataclass(frozen=True)
class ReferenceSystem:
    name: str
    d: int
    f: Callable
    xbar: tuple
    jacobian: np.ndarray
    box: Box
    A: Optional[np.ndarray] = None  # set for linear systems
    description: str = ""

    def __post_init__(self):
        J = np.atleast_2d(np.asarray(self.jacobian, dtype=float))
        if np.max(np.linalg.eigvals(J).real) >= 0:
            raise ValueError(f"{self.name}: equilibrium is not exponentially stable")
        object.__setattr__(self, "jacobian", J)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.f(x.reshape(-1, self.d)).reshape(x.shape)

    @property
    def decay_rate(self):
        return float(-np.max(np.linalg.eigvals(self.jacobian).real))

    def known_V(self, Q=None):
        """Exact ``V(x) = (x - xbar)^T P (x - xbar)`` for linear systems, else None."""
        if self.A is None:
            return None
        P = oracle_V_quadratic(self.A, np.eye(self.d) if Q is None else Q)
        xbar = np.asarray(self.xbar)

        def V(x):
            y = np.atleast_2d(x) - xbar
            return np.einsum("ij,jk,ik->i", y, P, y)
        return V


def _linear(name, A, box, description):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    d = A.shape[0]
    return ReferenceSystem(name, d, lambda x: x @ A.T, (0.0,) * d, A, box, A, description)


def _nonlinear2d(x):
    out = -x.copy()
    out[:, 0] += 0.25 * x[:, 1] ** 2
    out[:, 1] += 0.25 * x[:, 0] * x[:, 1]
    return out


SYSTEMS = {
    "linear1d": _linear("linear1d", [[-1.0]], Box([-1.0], [1.0]), "x' = -x"),
    "linear2d": _linear("linear2d", [[-1.0, 2.0], [-3.0, -1.0]], Box([-1.0, -1.0], [1.0, 1.0]),
                        "spiral sink x' = A x, A = [[-1, 2], [-3, -1]]"),
    "sink2d": _linear("sink2d", -np.eye(2), Box([-1.2, -1.2], [1.2, 1.2]), "x' = -x in the plane"),
    "nonlinear2d": ReferenceSystem(
        "nonlinear2d", 2, _nonlinear2d, (0.0, 0.0), -np.eye(2), Box([-1.0, -1.0], [1.0, 1.0]),
        description="x' = -x + 0.25 (x2^2, x1 x2)"),
}


def get_system(name):
    try:
        return SYSTEMS[name]
    except KeyError:
        raise ValueError(f"unknown system {name!r}; choose from {sorted(SYSTEMS)}") from None


@dataclass(frozen=True)
class NoiseModel:
    family: str = "gaussian"
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.family not in ("gaussian", "uniform"):
            raise ValueError(f"unknown noise family {self.family!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")

    def draw(self, shape, rng):
        if self.family == "gaussian":
            return rng.normal(0.0, self.sigma, size=shape)
        half = np.sqrt(3.0) * self.sigma
        return rng.uniform(-half, half, size=shape)


def sample_sites(box, m, seed=0, design="random"):
    """``m`` sites in ``box``: i.i.d. uniform, scrambled Sobol, or a grid."""
    if m < 1:
        raise ValueError("need at least one site")
    lo, hi = np.asarray(box.lo), np.asarray(box.hi)
    d = box.dim
    if design == "random":
        u = np.random.default_rng(seed).random((m, d))
    elif design == "sobol":
        from scipy.stats import qmc
        # prefix of a power-of-two Sobol block
        u = qmc.Sobol(d, scramble=True, seed=seed).random_base2(int(np.ceil(np.log2(m))))[:m]
    elif design == "grid":
        n = int(round(m ** (1.0 / d)))
        if n**d != m:
            raise ValueError(f"grid design needs m to be a perfect {d}-th power")
        axes = [np.linspace(0.0, 1.0, n)] * d
        u = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    else:
        raise ValueError(f"unknown design {design!r}")
    return lo + u * (hi - lo)


def generate_data(sys, sites, noise):
    """Noisy samples ``y_i = f*(x_i) + eta_i`` with independent components."""
    x = np.atleast_2d(np.asarray(sites, dtype=float)).reshape(-1, sys.d)
    rng = np.random.default_rng(noise.seed)
    y = sys(x) + noise.draw(x.shape, rng)
    return SampleSet(x, y, sigma=noise.sigma)


def oracle_V_quadratic(A, Q):
    """``P`` with ``A^T P + P A = -Q`` (so ``V = x^T P x`` solves ``<grad V, A x> = -x^T Q x``)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if np.max(np.linalg.eigvals(A).real) >= 0:
        raise ValueError("A is not Hurwitz")
    d = A.shape[0]
    eye = np.eye(d)
    # column-major vec: vec(A^T P) = (I kron A^T) vec P, vec(P A) = (A^T kron I) vec P
    L = np.kron(eye, A.T) + np.kron(A.T, eye)
    P = np.linalg.solve(L, -Q.reshape(-1, order="F")).reshape(d, d, order="F")
    return 0.5 * (P + P.T)


def rk4_step(f, x, h):
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate(f, x0, t_end, h=RK4_STEP):
    """Fixed-step RK4 from ``x0`` (shape (n, d)) to time ``t_end``."""
    x = np.array(x0, dtype=float)
    n = int(round(abs(t_end) / h))
    step = np.sign(t_end) * abs(t_end) / n if n else 0.0
    for _ in range(n):
        x = rk4_step(f, x, step)
    return x


def _as_batch(x, d):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 0 or (x.ndim == 1 and (d > 1 or x.size == 1))
    return np.atleast_2d(x).reshape(-1, d), single


def oracle_V_flow(sys, p, x, tol=TAIL_TOL, h=RK4_STEP, t_max=200.0, return_error=False):
    """``V(x) = int_0^inf p(phi(t, x)) dt`` by RK4 on the augmented system.

    Integration stops once ``|phi - xbar| < tol``; the remaining tail is
    approximated by ``p(phi) / (2 mu)`` with ``mu`` the decay rate of the
    linearization and reported as the error estimate.
    """
    X, single = _as_batch(x, sys.d)
    xbar = np.asarray(sys.xbar)
    d = sys.d

    def aug(z):
        out = np.empty_like(z)
        out[:, :d] = sys(z[:, :d])
        out[:, d] = p(z[:, :d])
        return out

    z = np.hstack([X, np.zeros((len(X), 1))])
    active = np.linalg.norm(X - xbar, axis=1) >= tol
    t = 0.0
    while np.any(active):
        if t > t_max:
            raise NotInBasinError(
                f"trajectory from {X[np.flatnonzero(active)[0]].tolist()} did not contract "
                f"within t={t_max}")
        z[active] = rk4_step(aug, z[active], h)
        t += h
        active &= np.linalg.norm(z[:, :d] - xbar, axis=1) >= tol
    tail = p(z[:, :d]) / (2.0 * sys.decay_rate)
    vals = z[:, d] + tail
    if single:
        vals, tail = float(vals[0]), float(tail[0])
    return (vals, tail) if return_error else vals


def oracle_T_flow(sys, gamma, cbar, xiT, x, h=RK4_STEP, t_max=100.0, return_theta=False):
    """``T(x) = xi_T(phi(theta, x)) + cbar * theta`` with ``theta`` the signed
    time at which the trajectory through ``x`` meets ``gamma``.

    Points outside the sphere flow forward, points inside backward; the
    crossing inside the last RK4 step is located by bisection on the step
    length. The crossing must be transversal and inward.
    """
    X, single = _as_batch(x, sys.d)
    n = len(X)
    direction = np.where(gamma.h(X) > 0, 1.0, -1.0)
    theta = np.zeros(n)
    hit = X.copy()
    todo = gamma.h(X) != 0.0
    z = X.copy()
    t = 0.0
    while np.any(todo):
        if t > t_max:
            raise NoCrossingError(
                f"trajectory from {X[np.flatnonzero(todo)[0]].tolist()} never met the hypersurface")
        idx = np.flatnonzero(todo)
        step = direction[idx, None] * h
        z_new = _rk4_signed(sys, z[idx], step)
        crossed = np.sign(gamma.h(z_new)) != np.sign(gamma.h(z[idx]))
        crossed |= gamma.h(z_new) == 0.0
        if np.any(crossed):
            ci = idx[crossed]
            z0 = z[ci]
            lo = np.zeros(len(ci))
            hi = np.full(len(ci), h)
            s0 = np.sign(gamma.h(z0))
            while np.max(hi - lo) > BISECT_TOL:
                mid = 0.5 * (lo + hi)
                zm = _rk4_signed(sys, z0, direction[ci, None] * mid[:, None])
                same = np.sign(gamma.h(zm)) == s0
                lo = np.where(same, mid, lo)
                hi = np.where(same, hi, mid)
            tau = 0.5 * (lo + hi)
            hit[ci] = _rk4_signed(sys, z0, direction[ci, None] * tau[:, None])
            theta[ci] = direction[ci] * (t + tau)
            todo[ci] = False
        z[idx] = z_new
        t += h
    flux = np.einsum("ij,ij->i", gamma.grad_h(hit), sys(hit))
    if np.any(flux >= 0):
        raise ValueError("hypersurface is not crossed inward (not non-characteristic)")
    xi = np.asarray(xiT(hit) if callable(xiT) else np.full(n, float(xiT)), dtype=float)
    T = xi + cbar * theta
    if single:
        T, theta = float(T[0]), float(theta[0])
    return (T, theta) if return_theta else T


def _rk4_signed(sys, x, step):
    """RK4 step with a per-row step length (shape (n, 1))."""
    f = sys
    k1 = f(x)
    k2 = f(x + 0.5 * step * k1)
    k3 = f(x + 0.5 * step * k2)
    k4 = f(x + step * k3)
    return x + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
