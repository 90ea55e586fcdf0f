"""Compact convex feasible sets with linear minimization oracles.

Every domain is an immutable value exposing ``lmo``, ``contains``,
``diameter`` and a sampler. Ties in the LMO are broken deterministically
(lowest index, or ``lo`` for boxes) so that runs are reproducible.
"""

from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .core import Vector, as_vector
from .errors import UnsupportedOperation, UsageError

NORMS = ("l1", "l2", "linf")

_NORM_ORD = {"l1": 1, "l2": 2, "linf": np.inf}


def _check_norm(norm: str) -> None:
    if norm not in NORMS:
        raise UsageError(f"unsupported norm {norm!r}; expected one of {NORMS}")


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class Domain(ABC):
    """A compact convex set in R^d."""

    kind: str

    @property
    @abstractmethod
    def dim(self) -> int: ...

    @abstractmethod
    def _lmo(self, c: Vector) -> Vector: ...

    @abstractmethod
    def violation(self, x: Vector, tol: float = 0.0) -> str | None:
        """Describe the first constraint ``x`` violates, or ``None``."""

    @abstractmethod
    def diameter(self, norm: str = "l2") -> float: ...

    @abstractmethod
    def vertices(self) -> np.ndarray:
        """All extreme points as rows, in tie-break order."""

    @abstractmethod
    def is_extreme(self, s: Vector) -> bool: ...

    @abstractmethod
    def _sample_interior(self, rng: np.random.Generator, n: int) -> np.ndarray: ...

    @abstractmethod
    def _sample_vertices(self, rng: np.random.Generator, n: int) -> np.ndarray: ...

    @abstractmethod
    def default_x0(self) -> Vector: ...

    def lmo(self, c) -> Vector:
        """Return an extreme point minimizing ``<s, c>`` over the domain."""
        c = as_vector(c, "c", dim=self.dim)
        return _readonly(self._lmo(c))

    def contains(self, x, tol: float = 0.0) -> bool:
        if tol < 0:
            raise UsageError(f"tol must be >= 0, got {tol}")
        x = as_vector(x, "x", dim=self.dim)
        return self.violation(x, tol) is None

    def require_feasible(self, x, tol: float) -> None:
        x = as_vector(x, "x", dim=self.dim)
        try:
            msg = self.violation(x, tol)
        except UnsupportedOperation:
            # Hull membership unavailable; iterates stay feasible by construction.
            return
        if msg is not None:
            raise UsageError(f"point is infeasible for {self.kind}: {msg}")

    def sample(self, rng: np.random.Generator, n: int, vertex_fraction: float = 0.25) -> np.ndarray:
        """Draw ``n`` feasible points; about ``vertex_fraction`` of them are vertices."""
        pts = self._sample_interior(rng, n)
        pick = rng.random(n) < vertex_fraction
        k = int(pick.sum())
        if k:
            pts[pick] = self._sample_vertices(rng, k)
        return pts


@dataclass(frozen=True, eq=False)
class Simplex(Domain):
    """The unit probability simplex ``{x >= 0, sum(x) = 1}`` in R^d."""

    d: int
    kind: str = field(default="simplex", init=False)

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise UsageError(f"simplex dimension must be a positive integer, got {self.d}")

    @property
    def dim(self) -> int:
        return self.d

    def _lmo(self, c):
        s = np.zeros(self.d)
        s[int(np.argmin(c))] = 1.0
        return s

    def violation(self, x, tol=0.0):
        i = int(np.argmin(x))
        if x[i] < -tol:
            return f"coordinate {i} is {x[i]!r} < 0"
        total = float(np.sum(x))
        if abs(total - 1.0) > tol:
            return f"coordinates sum to {total!r}, not 1"
        return None

    def diameter(self, norm="l2"):
        _check_norm(norm)
        if self.d == 1:
            return 0.0
        return {"l1": 2.0, "l2": float(np.sqrt(2.0)), "linf": 1.0}[norm]

    def vertices(self):
        return _readonly(np.eye(self.d))

    def is_extreme(self, s):
        return bool(np.count_nonzero(s) == 1 and np.max(s) == 1.0)

    def _sample_interior(self, rng, n):
        return rng.dirichlet(np.ones(self.d), size=n)

    def _sample_vertices(self, rng, n):
        return np.eye(self.d)[rng.integers(0, self.d, size=n)]

    def default_x0(self):
        return _readonly(np.eye(self.d)[0].copy())


@dataclass(frozen=True, eq=False)
class Box(Domain):
    """Axis-aligned box ``lo <= x <= hi`` with ``lo_i < hi_i``."""

    lo: Vector
    hi: Vector
    kind: str = field(default="box", init=False)

    def __post_init__(self):
        lo = as_vector(self.lo, "lo")
        hi = as_vector(self.hi, "hi", dim=lo.size)
        bad = np.flatnonzero(~(lo < hi))
        if bad.size:
            i = int(bad[0])
            raise UsageError(f"box coordinate {i} is degenerate or reversed: lo={lo[i]!r}, hi={hi[i]!r}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.size

    def _lmo(self, c):
        return np.where(c >= 0, self.lo, self.hi)

    def violation(self, x, tol=0.0):
        below = np.flatnonzero(x < self.lo - tol)
        if below.size:
            i = int(below[0])
            return f"coordinate {i} is {x[i]!r} < lo={self.lo[i]!r}"
        above = np.flatnonzero(x > self.hi + tol)
        if above.size:
            i = int(above[0])
            return f"coordinate {i} is {x[i]!r} > hi={self.hi[i]!r}"
        return None

    def diameter(self, norm="l2"):
        _check_norm(norm)
        return float(np.linalg.norm(self.hi - self.lo, ord=_NORM_ORD[norm]))

    def vertices(self):
        if self.dim > 20:
            raise UnsupportedOperation(f"refusing to enumerate 2^{self.dim} box vertices")
        corners = itertools.product(*zip(self.lo, self.hi))
        return _readonly(np.array(list(corners), dtype=np.float64))

    def is_extreme(self, s):
        return bool(np.all((s == self.lo) | (s == self.hi)))

    def _sample_interior(self, rng, n):
        return self.lo + (self.hi - self.lo) * rng.random((n, self.dim))

    def _sample_vertices(self, rng, n):
        return np.where(rng.integers(0, 2, size=(n, self.dim)) == 0, self.lo, self.hi)

    def default_x0(self):
        return self.lo


@dataclass(frozen=True, eq=False)
class L1Ball(Domain):
    """``{x : ||x||_1 <= radius}`` in R^d."""

    radius: float
    d: int
    kind: str = field(default="l1ball", init=False)

    def __post_init__(self):
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise UsageError(f"l1-ball radius must be positive and finite, got {self.radius!r}")
        if int(self.d) != self.d or self.d < 1:
            raise UsageError(f"l1-ball dimension must be a positive integer, got {self.d}")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return self.d

    def _lmo(self, c):
        i = int(np.argmax(np.abs(c)))
        s = np.zeros(self.d)
        # c_i == 0 only when c == 0; any vertex is optimal then.
        s[i] = -self.radius if c[i] >= 0 else self.radius
        return s

    def violation(self, x, tol=0.0):
        n1 = float(np.sum(np.abs(x)))
        if n1 > self.radius + tol:
            return f"l1 norm {n1!r} exceeds radius {self.radius!r}"
        return None

    def diameter(self, norm="l2"):
        _check_norm(norm)
        return 2.0 * self.radius

    def vertices(self):
        eye = self.radius * np.eye(self.d)
        # Interleave +r e_i, -r e_i so index order follows coordinate order.
        return _readonly(np.stack([eye, -eye], axis=1).reshape(2 * self.d, self.d))

    def is_extreme(self, s):
        nz = np.flatnonzero(s)
        return bool(nz.size == 1 and abs(s[nz[0]]) == self.radius)

    def _sample_interior(self, rng, n):
        w = rng.dirichlet(np.ones(self.d + 1), size=n)[:, : self.d]
        signs = np.where(rng.random((n, self.d)) < 0.5, -1.0, 1.0)
        return self.radius * w * signs

    def _sample_vertices(self, rng, n):
        return self.vertices()[rng.integers(0, 2 * self.d, size=n)]

    def default_x0(self):
        x = np.zeros(self.d)
        x[0] = self.radius
        return _readonly(x)


@dataclass(frozen=True, eq=False)
class AtomSet(Domain):
    """Convex hull of a finite list of points (the "atoms")."""

    points: np.ndarray
    kind: str = field(default="atomset", init=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise UsageError(f"atom set needs a non-empty list of equal-length vertices, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise UsageError("atom set vertices must be finite")
        object.__setattr__(self, "points", _readonly(pts))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def _lmo(self, c):
        return self.points[int(np.argmin(self.points @ c))].copy()

    def violation(self, x, tol=0.0):
        if self.dim > 3:
            raise UnsupportedOperation("convex-hull membership is only supported for d <= 3")
        center, basis, halfspaces = self._hull
        y = x - center
        coords = basis.T @ y
        off = 0.0 if basis.shape[1] == self.dim else float(np.linalg.norm(y - basis @ coords))
        if off > tol:
            return f"point is {off!r} away from the affine hull of the vertices"
        for normal, offset in halfspaces:
            excess = float(normal @ coords - offset)
            if excess > tol:
                return f"point lies {excess!r} outside a facet of the convex hull"
        return None

    @cached_property
    def _hull(self):
        """(center, orthonormal basis of affine hull, facet halfspaces)."""
        pts = self.points
        center = pts.mean(axis=0)
        _, sv, vt = np.linalg.svd(pts - center, full_matrices=False)
        scale = max(1.0, float(np.abs(pts).max()))
        k = int(np.sum(sv > 1e-12 * scale))
        basis = vt[:k].T
        proj = (pts - center) @ basis
        eps = 1e-12 * scale
        halfspaces = []
        if k == 1:
            halfspaces = [(np.array([1.0]), proj.max()), (np.array([-1.0]), -proj.min())]
        elif k >= 2:
            for combo in itertools.combinations(range(len(proj)), k):
                face = proj[list(combo)]
                diffs = face[1:] - face[0]
                _, fsv, fvt = np.linalg.svd(diffs)
                if fsv.size < k - 1 or fsv[-1] <= eps:
                    continue
                normal = fvt[-1]
                offset = float(normal @ face[0])
                side = proj @ normal - offset
                if np.all(side <= eps):
                    halfspaces.append((normal, offset))
                elif np.all(side >= -eps):
                    halfspaces.append((-normal, -offset))
        return center, basis, halfspaces

    def diameter(self, norm="l2"):
        _check_norm(norm)
        pts = self.points
        ordv = _NORM_ORD[norm]
        best = 0.0
        for i, j in itertools.combinations(range(len(pts)), 2):
            best = max(best, float(np.linalg.norm(pts[i] - pts[j], ord=ordv)))
        return best

    def vertices(self):
        return self.points

    def is_extreme(self, s):
        return bool(np.any(np.all(self.points == s, axis=1)))

    def _sample_interior(self, rng, n):
        w = rng.dirichlet(np.ones(len(self.points)), size=n)
        return w @ self.points

    def _sample_vertices(self, rng, n):
        return self.points[rng.integers(0, len(self.points), size=n)]

    def default_x0(self):
        return _readonly(self.points[0].copy())

    def affine_image(self, matrix, shift) -> AtomSet:
        """The atom set with every vertex mapped to ``matrix @ v + shift``."""
        matrix = np.asarray(matrix, dtype=np.float64)
        shift = as_vector(shift, "shift", dim=matrix.shape[0])
        return AtomSet(self.points @ matrix.T + shift)


def lmo(c, domain: Domain) -> Vector:
    return domain.lmo(c)


def contains(x, domain: Domain, tol: float = 0.0) -> bool:
    return domain.contains(x, tol)


def diameter(domain: Domain, norm: str = "l2") -> float:
    return domain.diameter(norm)
