"""Domains, verification grids, Voronoi weights and fill distances."""

from dataclasses import dataclass
from math import ceil, floor, pi, sqrt
from typing import Optional, Union

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import qmc

from . import _backend
from .errors import DuplicateSiteError, EmptyRegionError

DUPLICATE_TOL = 1e-12


def _vec(x):
    return tuple(float(v) for v in np.atleast_1d(np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo, hi = _vec(self.lo), _vec(self.hi)
        if len(lo) != len(hi) or any(a >= b for a, b in zip(lo, hi)):
            raise ValueError(f"invalid box {lo} .. {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return len(self.lo)

    @property
    def volume(self):
        return float(np.prod(np.subtract(self.hi, self.lo)))

    @property
    def diameter(self):
        return float(np.linalg.norm(np.subtract(self.hi, self.lo)))

    def contains(self, x, tol=1e-12):
        x = np.atleast_2d(x)
        return np.all((x >= np.subtract(self.lo, tol)) & (x <= np.add(self.hi, tol)), axis=1)

    def corners(self):
        grids = np.meshgrid(*[(a, b) for a, b in zip(self.lo, self.hi)], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def to_dict(self):
        return {"type": "box", "lo": list(self.lo), "hi": list(self.hi)}


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return len(self.center)

    @property
    def diameter(self):
        return 2.0 * self.radius

    def contains(self, x, tol=1e-12):
        x = np.atleast_2d(x)
        return np.linalg.norm(x - np.asarray(self.center), axis=1) <= self.radius * (1 + tol)

    def to_dict(self):
        return {"type": "ball", "center": list(self.center), "radius": self.radius}


@dataclass(frozen=True)
class Sphere:
    """Level set ``h(x) = |x - center|^2 - radius^2 = 0``."""

    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        if not self.radius > 0:
            raise ValueError("sphere radius must be positive")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return len(self.center)

    def h(self, x):
        x = np.asarray(x, dtype=float)
        return np.sum((x - np.asarray(self.center)) ** 2, axis=-1) - self.radius**2

    def grad_h(self, x):
        return 2.0 * (np.asarray(x, dtype=float) - np.asarray(self.center))

    def points(self, n):
        """``n`` nearly uniform points on the sphere (exactly uniform in 2-D)."""
        d, c, R = self.dim, np.asarray(self.center), self.radius
        if n < 1:
            raise ValueError("need at least one surface point")
        if d == 1:
            pts = np.array([[-R], [R]])[: max(1, min(n, 2))]
        elif d == 2:
            ang = 2 * pi * np.arange(n) / n
            pts = R * np.stack([np.cos(ang), np.sin(ang)], axis=1)
            pts[np.abs(pts) < 1e-15 * R] = 0.0
        elif d == 3:
            i = np.arange(n) + 0.5
            z = 1 - 2 * i / n
            phi = pi * (1 + sqrt(5)) * i
            rho = np.sqrt(1 - z * z)
            pts = R * np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
        else:
            raise ValueError("sphere point sets implemented for d <= 3")
        return pts + c

    def n_for_spacing(self, spacing):
        d, R = self.dim, self.radius
        if d == 1:
            return 2
        if d == 2:
            return max(3, ceil(2 * pi * R / spacing))
        return max(4, ceil(4 * pi * R * R / spacing**2))

    def to_dict(self):
        return {"type": "sphere", "center": list(self.center), "radius": self.radius}


Region = Union[Box, Ball, Sphere]


def region_from_dict(data):
    kind = data["type"]
    if kind == "box":
        return Box(data["lo"], data["hi"])
    if kind == "ball":
        return Ball(data["center"], data["radius"])
    if kind == "sphere":
        return Sphere(data["center"], data["radius"])
    raise ValueError(f"unknown region type {kind!r}")


@dataclass(frozen=True)
class DomainSpec:
    """Ambient box ``X``, approximation domain ``omega`` with the ball
    ``B_eps(xbar)`` removed, and an optional hypersurface ``gamma``.

    ``xbar`` may be omitted when only ``gamma`` is used.
    """

    X: Box
    omega: Union[Box, Ball]
    xbar: Optional[tuple] = None
    eps: float = 0.0
    gamma: Optional[Sphere] = None

    def __post_init__(self):
        if self.xbar is not None:
            object.__setattr__(self, "xbar", _vec(self.xbar))
        if self.eps < 0:
            raise ValueError("eps must be non-negative")
        if self.gamma is not None and self.xbar is not None:
            dist = np.linalg.norm(np.subtract(self.gamma.center, self.xbar))
            if self.gamma.radius - dist <= self.eps:
                raise ValueError("gamma must not meet the excluded ball B_eps(xbar)")

    @property
    def excluded(self):
        if self.xbar is None or self.eps <= 0:
            return None
        return Ball(self.xbar, self.eps)

    def in_D(self, x):
        x = np.atleast_2d(x)
        keep = self.omega.contains(x)
        if self.excluded is not None:
            keep &= outside(self.excluded, x)
        return keep


@dataclass(frozen=True)
class WeightedSites:
    x: np.ndarray
    w: np.ndarray
    h_x: float

    @property
    def w_norm(self):
        return float(np.linalg.norm(self.w))


def outside(ball, x, rtol=1e-9):
    """Mask of points not strictly inside ``ball``; points on the rim up to
    rounding (relative ``rtol``) count as outside."""
    x = np.atleast_2d(x)
    return np.linalg.norm(x - np.asarray(ball.center), axis=1) >= ball.radius * (1 - rtol)


def check_distinct(x, tol=DUPLICATE_TOL):
    x = np.atleast_2d(x)
    if len(x) < 2:
        return
    pairs = cKDTree(x).query_pairs(tol)
    if pairs:
        i, j = sorted(min(pairs))
        raise DuplicateSiteError(f"duplicate sites {i} and {j} at {x[i].tolist()}")


def voronoi_weights(x, X, n_mc=None, seed=0):
    """Lebesgue volumes of the Voronoi cells of ``x`` inside box ``X``.

    Cell volumes are estimated by assigning scrambled Sobol points to their
    nearest site (ties to the lowest index). The sample count is rounded up
    to a power of two, so the fractions of a 1-D box are exact for sites
    whose bisectors fall on dyadic points. The weights sum to ``vol(X)``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    m, d = x.shape
    if d != X.dim:
        raise ValueError("site dimension does not match the box")
    if not np.all(X.contains(x)):
        raise ValueError("all sites must lie in X")
    check_distinct(x)
    if n_mc is None:
        n_mc = max(64 * m, 2**16)
    if n_mc < 10 * m:
        raise ValueError(f"n_mc={n_mc} too small; need at least 10 * m = {10 * m}")
    u = qmc.Sobol(d, scramble=True, seed=seed).random_base2(ceil(np.log2(n_mc)))
    samples = np.asarray(X.lo) + u * np.subtract(X.hi, X.lo)
    counts = _backend.nearest_counts(samples, x)
    return X.volume * counts / len(samples)


def candidate_points(C, n_candidates):
    """Deterministic dense point set covering ``C`` (grid plus boundary)."""
    d = C.dim
    if isinstance(C, Sphere):
        return C.points(n_candidates)
    per_axis = max(2, int(round(n_candidates ** (1.0 / d))))
    if isinstance(C, Box):
        axes = [np.linspace(a, b, per_axis) for a, b in zip(C.lo, C.hi)]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)
    c, R = np.asarray(C.center), C.radius
    axes = [np.linspace(-R, R, per_axis) for _ in range(d)]
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    pts = pts[np.linalg.norm(pts, axis=1) <= R] + c
    if d > 1:
        rim = Sphere(C.center, R).points(per_axis * (4 if d == 2 else per_axis))
    else:
        rim = np.array([[c[0] - R], [c[0] + R]])
    return np.vstack([pts, rim])


def default_candidates(d):
    return {1: 10001, 2: 201**2, 3: 61**3}.get(d, 20**d)


def fill_distance(x, C, n_candidates=None, exclude=None):
    """Largest distance from a candidate point of ``C`` to its nearest site.

    A lower bound on the exact fill distance that increases towards it as
    ``n_candidates`` grows. With ``exclude`` (a ball) the set is ``C`` minus
    the open ball, whose rim is added to the candidates.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.size == 0:
        raise ValueError("fill distance of an empty site set")
    if n_candidates is None:
        n_candidates = default_candidates(C.dim)
    cand = candidate_points(C, n_candidates)
    if exclude is not None:
        cand = cand[outside(exclude, cand)]
        if C.dim > 1 and not isinstance(C, Sphere):
            rim = Sphere(exclude.center, exclude.radius).points(
                int(round(n_candidates ** (1.0 / C.dim))) * 4)
            cand = np.vstack([cand, rim[C.contains(rim)]])
        if len(cand) == 0:
            raise EmptyRegionError("region is empty after removing the excluded ball")
    dist, _ = cKDTree(x).query(cand)
    return float(np.max(dist))


def weigh_sites(x, X, n_mc=None, seed=0, n_candidates=None):
    w = voronoi_weights(x, X, n_mc=n_mc, seed=seed)
    return WeightedSites(np.atleast_2d(np.asarray(x, dtype=float)), w,
                         fill_distance(x, X, n_candidates))


def make_grid(region, spacing, exclude=None):
    """Regular grid points of ``region`` with spacing ``spacing``.

    Boxes are anchored at their lower corner, balls at their center; a
    sphere yields evenly spread surface points at roughly that spacing.
    Points strictly inside the ball ``exclude`` are dropped.
    """
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    d = region.dim
    if isinstance(region, Sphere):
        pts = region.points(region.n_for_spacing(spacing))
    elif isinstance(region, Box):
        axes = []
        for a, b in zip(region.lo, region.hi):
            n = floor((b - a) / spacing + 1e-9) + 1
            axes.append(a + spacing * np.arange(n))
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
    else:
        n = floor(region.radius / spacing + 1e-9)
        ax = spacing * np.arange(-n, n + 1)
        grids = np.meshgrid(*([ax] * d), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        pts = pts[np.linalg.norm(pts, axis=1) <= region.radius * (1 + 1e-12)]
        pts = pts + np.asarray(region.center)
    if exclude is not None:
        pts = pts[outside(exclude, pts)]
    if len(pts) == 0:
        raise EmptyRegionError(
            "grid is empty; enlarge the region or use a smaller spacing")
    return pts
