"""Frank-Wolfe with adaptive step sizes, and the bound quantities of its rate.

``solve`` runs the method with one of three step rules:

* ``linesearch``: minimize ``f(x + gamma d)`` over ``gamma in [0, 1]``;
* ``quadbound``: ``gamma = min(gap / C, 1)``, the minimizer of the
  quadratic upper bound ``f(x) - gamma gap + gamma^2 C / 2``;
* ``classic``: the non-adaptive ``2 / (t + 2)`` schedule, kept as a baseline.

Every iteration is recorded together with the bound values the checker in
:mod:`fwgap.checks` compares against.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .core import FEASIBILITY_TOL, Vector, as_vector, fw_gap
from .domains import Domain
from .errors import NumericError, UsageError

GOLDEN_TOL = 1e-10
COARSE_POINTS = 65


class StepRule(str, enum.Enum):
    LINE_SEARCH = "linesearch"
    QUAD_BOUND = "quadbound"
    CLASSIC = "classic"

    @property
    def adaptive(self) -> bool:
        return self is not StepRule.CLASSIC


@dataclass(frozen=True)
class SolverConfig:
    step_rule: StepRule
    curvature_C: float
    epsilon: float = 1e-8
    max_iters: int = 1000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "step_rule", StepRule(self.step_rule))
        if not (math.isfinite(self.curvature_C) and self.curvature_C > 0):
            raise UsageError(f"curvature_C must be a positive real, got {self.curvature_C!r}")
        if not self.epsilon >= 0:
            raise UsageError(f"epsilon must be >= 0, got {self.epsilon!r}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 0:
            raise UsageError(f"max_iters must be a nonnegative integer, got {self.max_iters!r}")


@dataclass(frozen=True, eq=False)
class IterationRecord:
    t: int
    f_value: float
    gap: float
    min_gap: float
    gamma: float
    decrease_bound: float
    theorem_rhs: float | None = None
    refined_rhs: float | None = None
    # Not serialized; kept so checks can re-evaluate f along the step.
    point: Vector | None = field(default=None, repr=False)
    direction: Vector | None = field(default=None, repr=False)
    stepped: bool = True


@dataclass(frozen=True, eq=False)
class RunTrace:
    records: list[IterationRecord]
    terminated_early: bool
    final_point: Vector
    final_value: float
    step_rule: StepRule
    curvature_C: float
    h0: float | None = None
    h0_provenance: str = "unknown"  # exact_oracle | grid_estimate | unknown

    @property
    def final_gap(self) -> float:
        return self.records[-1].gap

    def column(self, name: str) -> np.ndarray:
        vals = [getattr(r, name) for r in self.records]
        return np.array([np.nan if v is None else v for v in vals], dtype=np.float64)


def step_quadbound(gap: float, C: float) -> float:
    if gap < 0 or not C > 0:
        raise UsageError(f"need gap >= 0 and C > 0, got gap={gap!r}, C={C!r}")
    return min(gap / C, 1.0)


def step_classic(t: int) -> float:
    if t < 0:
        raise UsageError(f"t must be >= 0, got {t}")
    return 2.0 / (t + 2)


def exact_linesearch_quadratic(obj, x, d) -> float:
    """Exact minimizer of ``phi(gamma) = f(x + gamma d)`` on [0, 1] for a quadratic.

    ``phi(gamma) - phi(0) = slope gamma + curv gamma^2 / 2``. A nonpositive
    curvature makes ``phi`` concave or linear, so an endpoint wins; ties go
    to 0.
    """
    slope = float(np.dot(obj.gradient(x), d))
    curv = obj.curvature_along(d)
    if curv > 0:
        return min(max(-slope / curv, 0.0), 1.0)
    return 1.0 if slope + 0.5 * curv < 0 else 0.0


def linesearch_generic(obj, x, d) -> float:
    """Coarse scan of [0, 1] followed by golden-section refinement.

    Returns a step whose value is no worse than the best coarse grid point;
    global optimality on multimodal ``phi`` is not certified.
    """
    x = np.asarray(x, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)

    def phi(g: float) -> float:
        return obj.value(x + g * d)

    grid = np.linspace(0.0, 1.0, COARSE_POINTS)
    vals = [phi(g) for g in grid]
    k = int(np.argmin(vals))
    best_g, best_v = float(grid[k]), vals[k]

    a, b = float(grid[max(k - 1, 0)]), float(grid[min(k + 1, COARSE_POINTS - 1)])
    invphi = (math.sqrt(5) - 1) / 2
    c, e = b - invphi * (b - a), a + invphi * (b - a)
    fc, fe = phi(c), phi(e)
    while b - a > GOLDEN_TOL:
        if fc <= fe:
            b, e, fe = e, c, fc
            c = b - invphi * (b - a)
            fc = phi(c)
        else:
            a, c, fc = c, e, fe
            e = a + invphi * (b - a)
            fe = phi(e)
    g = 0.5 * (a + b)
    v = phi(g)
    if v < best_v:
        return g
    return best_g


def per_iter_decrease_bound(gap: float, C: float) -> float:
    """Guaranteed decrease ``min(gap^2 / 2C, gap - C/2 * [gap > C])``."""
    if gap < 0 or not C > 0:
        raise UsageError(f"need gap >= 0 and C > 0, got gap={gap!r}, C={C!r}")
    return min(gap * gap / (2 * C), gap - (0.5 * C if gap > C else 0.0))


def theorem_bound_rhs(h0: float, C: float, t: int) -> float:
    """``max(2 h0, C) / sqrt(t + 1)``, the bound on the minimal gap after t iterations."""
    _check_bound_args(h0, C, t)
    return max(2.0 * h0, C) / math.sqrt(t + 1)


def refined_bound_rhs(h0: float, C: float, t: int) -> float:
    """Two-phase bound: ``h0/(t+1) + C/2`` while ``t + 1 <= 2 h0 / C``, else ``sqrt(2 h0 C / (t+1))``."""
    _check_bound_args(h0, C, t)
    if t + 1 <= 2.0 * h0 / C:
        return h0 / (t + 1) + 0.5 * C
    return math.sqrt(2.0 * h0 * C / (t + 1))


def _check_bound_args(h0, C, t):
    if h0 < 0 or not C > 0 or t < 0:
        raise UsageError(f"need h0 >= 0, C > 0, t >= 0; got h0={h0!r}, C={C!r}, t={t!r}")


def _pick_linesearch(obj):
    if hasattr(obj, "curvature_along"):
        return exact_linesearch_quadratic
    return linesearch_generic


def solve(
    obj,
    domain: Domain,
    config: SolverConfig,
    x0=None,
    h0: float | None = None,
    h0_provenance: str = "unknown",
) -> RunTrace:
    """Run Frank-Wolfe from ``x0`` (default: the domain's first vertex).

    Iterations ``t = 0 .. max_iters`` each compute the gap at ``x^(t)`` and,
    unless ``gap <= epsilon``, take a step to ``x^(t+1)``. The returned
    ``final_point`` is the last iterate produced.
    """
    if obj.dim != domain.dim:
        raise UsageError(f"objective dimension {obj.dim} != domain dimension {domain.dim}")
    x = domain.default_x0() if x0 is None else as_vector(x0, "x0", dim=domain.dim)
    domain.require_feasible(x, FEASIBILITY_TOL)
    if h0 is None:
        h0_provenance = "unknown"
    elif h0 < 0:
        raise UsageError(f"h0 must be >= 0, got {h0!r}")

    C = config.curvature_C
    rule = config.step_rule
    linesearch = _pick_linesearch(obj)
    records: list[IterationRecord] = []
    min_gap = math.inf
    f = obj.value(x)
    terminated = False

    for t in range(config.max_iters + 1):
        if not math.isfinite(f):
            raise NumericError(f"objective value is {f!r} at iteration {t}")
        grad = obj.gradient(x)
        if not np.all(np.isfinite(grad)):
            raise NumericError(f"non-finite gradient at iteration {t}")
        res = fw_gap(x, grad, domain)
        gap = res.gap
        min_gap = min(min_gap, gap)
        thm = ref = None
        if h0 is not None:
            thm = theorem_bound_rhs(h0, C, t)
            ref = refined_bound_rhs(h0, C, t)

        if gap <= config.epsilon:
            terminated = True
            records.append(
                IterationRecord(t, f, gap, min_gap, 0.0, per_iter_decrease_bound(gap, C),
                                thm, ref, x, res.direction, stepped=False)
            )
            break

        if rule is StepRule.QUAD_BOUND:
            gamma = step_quadbound(gap, C)
        elif rule is StepRule.LINE_SEARCH:
            gamma = linesearch(obj, x, res.direction)
        else:
            gamma = step_classic(t)

        records.append(
            IterationRecord(t, f, gap, min_gap, gamma, per_iter_decrease_bound(gap, C),
                            thm, ref, x, res.direction)
        )
        x = x + gamma * res.direction
        x.setflags(write=False)
        f = obj.value(x)

    if not math.isfinite(f):
        raise NumericError(f"objective value is {f!r} after the final step")
    return RunTrace(records, terminated, x, f, rule, C, h0, h0_provenance)
