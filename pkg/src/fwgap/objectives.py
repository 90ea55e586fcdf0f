"""Quadratic test objectives, curvature constants and global-minimum oracles.

The objectives are ``f(x) = 1/2 x^T A x + b^T x`` with symmetric, possibly
indefinite ``A``. Everything a convergence check needs is available in
closed form: value, gradient, the Bregman remainder
``f(y) - f(x) - <grad f(x), y - x>``, and the curvature along a direction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .core import Vector, as_vector
from .domains import Box, Domain, L1Ball, Simplex, _check_norm
from .errors import UnsupportedOperation, UsageError

SYMMETRY_TOL = 1e-12

POWER_ITERS = 1000
POWER_TOL = 1e-10


def power_iteration(matrix, iters: int = POWER_ITERS, tol: float = POWER_TOL, seed: int = 0) -> float:
    """Largest absolute eigenvalue of a symmetric matrix.

    Tracks ``||A v||`` for the normalized iterate ``v``; this converges to
    ``max |lambda|`` even when ``+lambda`` and ``-lambda`` are both present.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    v = np.random.default_rng(seed).standard_normal(matrix.shape[0])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = matrix @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        if abs(norm - est) <= tol * norm:
            return norm
        est = norm
    return est


class Quadratic:
    """``f(x) = 1/2 x^T A x + b^T x`` with a dense symmetric ``A``.

    ``A`` is symmetrized on construction. ``lipschitz_L`` may be supplied;
    otherwise it is estimated by power iteration on first use.
    """

    kind = "quadratic"

    def __init__(self, A, b=None, lipschitz_L: float | None = None):
        A = np.array(A, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
            raise UsageError(f"A must be a non-empty square matrix, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise UsageError("A has non-finite entries")
        A = 0.5 * (A + A.T)
        A.setflags(write=False)
        self.A = A
        d = A.shape[0]
        self.b = as_vector(np.zeros(d) if b is None else b, "b", dim=d)
        if lipschitz_L is not None and not (np.isfinite(lipschitz_L) and lipschitz_L >= 0):
            raise UsageError(f"lipschitz_L must be a nonnegative real, got {lipschitz_L!r}")
        self._L = None if lipschitz_L is None else float(lipschitz_L)

    @property
    def dim(self) -> int:
        return self.b.size

    @property
    def matrix(self) -> np.ndarray:
        return self.A

    @property
    def lipschitz_L(self) -> float:
        if self._L is None:
            self._L = power_iteration(self.A)
        return self._L

    def _check(self, x) -> Vector:
        return as_vector(x, "x", dim=self.dim)

    def value(self, x) -> float:
        x = self._check(x)
        return float(0.5 * x @ (self.A @ x) + self.b @ x)

    def gradient(self, x) -> Vector:
        x = self._check(x)
        g = self.A @ x + self.b
        g.setflags(write=False)
        return g

    def curvature_along(self, d) -> float:
        """``d^T A d``, the second derivative of ``f`` along ``d``."""
        d = as_vector(d, "d", dim=self.dim)
        return float(d @ (self.A @ d))

    def bregman(self, x, y) -> float:
        """``f(y) - f(x) - <grad f(x), y - x>``, exactly ``1/2 (y-x)^T A (y-x)``."""
        return 0.5 * self.curvature_along(self._check(y) - self._check(x))

    def bregman_batch(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        D = Y - X
        return 0.5 * np.einsum("ij,jk,ik->i", D, self.A, D)


class DiagonalQuadratic(Quadratic):
    """``f(x) = 1/2 sum(diag_i x_i^2) + b^T x``; ``L = max |diag_i|`` exactly."""

    kind = "diagonal_quadratic"

    def __init__(self, diag, b=None):
        diag = as_vector(diag, "diag")
        self.diag = diag
        super().__init__(np.diag(diag), b, lipschitz_L=float(np.max(np.abs(diag))))

    def value(self, x) -> float:
        x = self._check(x)
        return float(0.5 * np.sum(self.diag * x * x) + self.b @ x)

    def gradient(self, x) -> Vector:
        x = self._check(x)
        g = self.diag * x + self.b
        g.setflags(write=False)
        return g

    def curvature_along(self, d) -> float:
        d = as_vector(d, "d", dim=self.dim)
        return float(np.sum(self.diag * d * d))

    def bregman_batch(self, X, Y):
        D = Y - X
        return 0.5 * (D * D) @ self.diag


class AffineComposition:
    """``y -> base(M^{-1} (y - q))``: a quadratic seen through an affine map.

    Pairs with :meth:`AtomSet.affine_image` to build the reparameterized
    problem for affine-invariance checks.
    """

    kind = "affine_composition"

    def __init__(self, base: Quadratic, matrix, shift):
        matrix = np.array(matrix, dtype=np.float64)
        if matrix.shape != (base.dim, base.dim):
            raise UsageError(f"map must be {base.dim}x{base.dim}, got {matrix.shape}")
        self.base = base
        self.M = matrix
        self.q = as_vector(shift, "shift", dim=base.dim)
        self.M_inv = np.linalg.inv(matrix)

    @property
    def dim(self) -> int:
        return self.base.dim

    def pull_back(self, y) -> Vector:
        return self.M_inv @ (as_vector(y, "y", dim=self.dim) - self.q)

    def value(self, y) -> float:
        return self.base.value(self.pull_back(y))

    def gradient(self, y) -> Vector:
        g = self.M_inv.T @ self.base.gradient(self.pull_back(y))
        g.setflags(write=False)
        return g

    def curvature_along(self, d) -> float:
        return self.base.curvature_along(self.M_inv @ as_vector(d, "d", dim=self.dim))

    def bregman(self, x, y) -> float:
        return self.base.bregman(self.pull_back(x), self.pull_back(y))


def value(obj, x) -> float:
    return obj.value(x)


def gradient(obj, x) -> Vector:
    return obj.gradient(x)


def finite_diff_check(obj, x, h: float = 1e-5) -> float:
    """Max relative error between the analytic gradient and central differences."""
    if not h > 0:
        raise UsageError(f"h must be positive, got {h!r}")
    x = as_vector(x, "x", dim=obj.dim)
    g = obj.gradient(x)
    worst = 0.0
    for i in range(x.size):
        e = np.zeros(x.size)
        e[i] = h
        fd = (obj.value(x + e) - obj.value(x - e)) / (2 * h)
        worst = max(worst, abs(fd - g[i]) / max(1.0, abs(g[i])))
    return worst


@dataclass(frozen=True)
class CurvatureEstimate:
    value: float
    method: str  # analytic_lipschitz_bound | sampled | exact_quadratic_vertexpair
    samples_used: int = 0
    norm: str | None = None
    heuristic: bool = field(default=False)


def dual_lipschitz(obj: Quadratic, norm: str) -> float:
    """Lipschitz constant of the gradient for ``norm`` paired with its dual.

    ``L`` (largest |eigenvalue|) is valid for l2, and for l1 because
    ``||.||_inf <= ||.||_2 <= ||.||_1``. For linf the dual is l1 and
    ``||A v||_1 <= d L ||v||_inf``.
    """
    _check_norm(norm)
    L = obj.lipschitz_L
    return L * obj.dim if norm == "linf" else L


def curvature_lipschitz_bound(obj: Quadratic, domain: Domain, norm: str = "l2") -> CurvatureEstimate:
    """Upper bound ``C_f <= L diam(domain)^2``."""
    if getattr(obj, "lipschitz_L", None) is None:
        raise UsageError("objective has no Lipschitz constant; supply lipschitz_L or use a quadratic")
    if obj.dim != domain.dim:
        raise UsageError(f"objective dimension {obj.dim} != domain dimension {domain.dim}")
    diam = domain.diameter(norm)
    return CurvatureEstimate(dual_lipschitz(obj, norm) * diam * diam, "analytic_lipschitz_bound", 0, norm)


def curvature_sampled(obj, domain: Domain, n: int = 100_000, seed: int = 0) -> CurvatureEstimate:
    """Monte Carlo lower estimate of the curvature constant.

    Samples ``x, s`` from the domain and ``gamma`` uniform on (0, 1], and
    maximizes ``2/gamma^2 * bregman(x, x + gamma (s - x))``. Any sampler can
    only under-estimate the supremum, so the result is flagged heuristic.
    """
    if n < 1:
        raise UsageError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    X = domain.sample(rng, n)
    S = domain.sample(rng, n)
    gamma = 1.0 - rng.random(n)  # (0, 1]
    Y = X + gamma[:, None] * (S - X)
    if hasattr(obj, "bregman_batch"):
        rem = obj.bregman_batch(X, Y)
    else:
        rem = np.array([obj.bregman(x, y) for x, y in zip(X, Y)])
    vals = 2.0 * rem / (gamma * gamma)
    return CurvatureEstimate(max(0.0, float(vals.max())), "sampled", n, heuristic=True)


def curvature_exact_vertexpair(obj: Quadratic, domain: Domain) -> CurvatureEstimate:
    """Exact ``C_f`` for a quadratic on a polytope: max of ``(s-x)^T A (s-x)`` over vertex pairs.

    ``(s-x)^T A (s-x)`` is a quadratic in the pair ``(x, s)``; its supremum
    over a product of polytopes sits at a vertex pair when it is convex, i.e.
    when ``A`` is positive semidefinite. Other objectives are rejected.
    """
    if np.linalg.eigvalsh(obj.matrix).min() < -1e-12:
        raise UnsupportedOperation("vertex-pair curvature is exact only for positive semidefinite A")
    V = domain.vertices()
    best = 0.0
    for i, j in itertools.combinations(range(len(V)), 2):
        best = max(best, obj.curvature_along(V[j] - V[i]))
    return CurvatureEstimate(best, "exact_quadratic_vertexpair", len(V))


def global_min_separable_box(obj: DiagonalQuadratic, box: Domain) -> tuple[float, Vector]:
    """Exact global minimum of a diagonal quadratic over a box.

    Each coordinate is minimized independently over its endpoints and, for
    strictly convex coordinates, the interior critical point. Endpoint ties
    go to ``lo``.
    """
    if not isinstance(box, Box):
        raise UsageError(f"global_min_separable_box needs a box domain, got {box.kind}")
    if not isinstance(obj, DiagonalQuadratic):
        raise UsageError(f"global_min_separable_box needs a diagonal quadratic, got {obj.kind}")
    if obj.dim != box.dim:
        raise UsageError(f"objective dimension {obj.dim} != box dimension {box.dim}")
    argmin = np.empty(obj.dim)
    for i, (a, b, lo, hi) in enumerate(zip(obj.diag, obj.b, box.lo, box.hi)):
        candidates = [lo, hi]
        if a > 0 and lo < -b / a < hi:
            candidates.append(-b / a + 0.0)  # no -0.0
        phi = [0.5 * a * z * z + b * z for z in candidates]
        argmin[i] = candidates[int(np.argmin(phi))]
    argmin.setflags(write=False)
    return obj.value(argmin), argmin


def _grid_points(domain: Domain, resolution: int) -> np.ndarray:
    d = domain.dim
    if isinstance(domain, Box):
        axes = [np.linspace(lo, hi, resolution) for lo, hi in zip(domain.lo, domain.hi)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    if isinstance(domain, Simplex):
        m = resolution - 1
        rows = [c + (m - sum(c),) for c in itertools.product(range(m + 1), repeat=d - 1) if sum(c) <= m]
        return np.array(rows, dtype=np.float64) / m
    if isinstance(domain, L1Ball):
        axis = np.linspace(-domain.radius, domain.radius, resolution)
        pts = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
        return pts[np.abs(pts).sum(axis=1) <= domain.radius * (1 + 1e-12)]
    raise UnsupportedOperation(f"grid_min does not support {domain.kind} domains")


def grid_min(obj: Quadratic, domain: Domain, resolution: int) -> tuple[float, Vector]:
    """Minimum over a regular grid of feasible points (d <= 3).

    This is an upper bound on the true minimum, so any ``h0`` derived from
    it is a lower bound on the true initial suboptimality.
    """
    if domain.dim > 3:
        raise UnsupportedOperation(f"grid_min is limited to d <= 3, got d={domain.dim}")
    if resolution < 2:
        raise UsageError(f"resolution must be >= 2, got {resolution}")
    pts = _grid_points(domain, resolution)
    vals = 0.5 * np.einsum("ij,jk,ik->i", pts, obj.matrix, pts) + pts @ obj.b
    k = int(np.argmin(vals))
    best = pts[k].copy()
    best.setflags(write=False)
    return obj.value(best), best
