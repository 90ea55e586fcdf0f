"""Vectors, the Frank-Wolfe gap and the Frank-Wolfe direction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, TypeAlias

import numpy as np
from numpy.typing import NDArray

from .errors import NumericError, OracleError, UsageError

if TYPE_CHECKING:
    from .domains import Domain

Vector: TypeAlias = NDArray[np.float64]

# Largest negative round-off tolerated in a gap before the LMO is blamed.
GAP_CLAMP_TOL = 1e-10
# Membership slack used when validating iterates.
FEASIBILITY_TOL = 1e-9


def as_vector(x, name: str = "x", dim: int | None = None) -> Vector:
    """Copy ``x`` into a read-only 1-D float64 array, validating it."""
    arr = np.array(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise UsageError(f"{name} must be a non-empty 1-D vector, got shape {arr.shape}")
    if dim is not None and arr.size != dim:
        raise UsageError(f"{name} has dimension {arr.size}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GapResult:
    gap: float
    atom: Vector
    direction: Vector


def clamp_gap(raw: float) -> float:
    """Clip round-off negatives to zero; refuse anything more negative.

    A gap below ``-GAP_CLAMP_TOL`` cannot come from an exact minimizer, so
    it is reported as an :class:`OracleError`.
    """
    if not np.isfinite(raw):
        raise NumericError(f"non-finite gap {raw!r}")
    if raw < -GAP_CLAMP_TOL:
        raise OracleError(f"negative FW gap {raw!r}: the LMO did not return a minimizer")
    return max(float(raw), 0.0)


def fw_gap(x, grad, domain: Domain, tol: float = FEASIBILITY_TOL) -> GapResult:
    """Frank-Wolfe gap ``max_s <s - x, -grad>`` at ``x``, with its atom.

    ``x`` must be feasible within ``tol``. The returned gap is computed as
    ``<atom - x, -grad>`` so it matches ``<direction, -grad>`` exactly.
    """
    x = as_vector(x, "x")
    grad = as_vector(grad, "grad", dim=x.size)
    domain.require_feasible(x, tol)
    atom = domain.lmo(grad)
    direction = atom - x
    direction.setflags(write=False)
    gap = clamp_gap(float(np.dot(direction, -grad)))
    return GapResult(gap=gap, atom=atom, direction=direction)
