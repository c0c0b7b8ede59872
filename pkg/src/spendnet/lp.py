"""Dense two-phase simplex for ``maximize c @ z  s.t.  A @ z = b, z >= 0``.

Pivoting uses Bland's lowest-index rule in both phases, so the method never
cycles and the result is a deterministic function of the input.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from .errors import NumericalBreakdown

logger = logging.getLogger(__name__)

PIVOT_TOL = 1e-12
FEAS_TOL = 1e-8
NONNEG_TOL = 1e-10


class LpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """Equality-form LP over nonnegative variables (maximization)."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if c.ndim != 1 or b.ndim != 1 or A.ndim != 2:
            raise ValueError("c and b must be vectors and A a matrix")
        if A.shape != (b.size, c.size):
            raise ValueError(f"A has shape {A.shape}, expected {(b.size, c.size)}")
        if A.size == 0:
            raise ValueError("need at least one constraint and one variable")
        if not (np.isfinite(c).all() and np.isfinite(A).all() and np.isfinite(b).all()):
            raise ValueError("LP data must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def shape(self):
        return self.A.shape


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    z: np.ndarray | None = None
    objective: float = float("nan")
    basis: tuple[int, ...] = ()

    @property
    def optimal(self):
        return self.status is LpStatus.OPTIMAL


def _pivot(T, obj, row, col):
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])
    obj -= obj[col] * T[row]


def _run(T, obj, basis, ncols, rc_tol):
    """Iterate Bland pivots on columns ``< ncols``; return False if unbounded."""
    while True:
        improving = np.flatnonzero(obj[:ncols] > rc_tol)
        if improving.size == 0:
            return True
        enter = int(improving[0])
        column = T[:, enter]
        eligible = column > PIVOT_TOL
        if not eligible.any():
            if (column > 0).any():
                raise NumericalBreakdown(
                    f"entering column {enter} has only sub-threshold pivots "
                    f"(max {column.max():.3e})"
                )
            return False
        rows = np.flatnonzero(eligible)
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
        leave = int(min(ties, key=lambda r: basis[r]))
        if logger.isEnabledFor(logging.DEBUG):
            logger.debug("pivot enter=%d leave_row=%d\n%s", enter, leave, T)
        _pivot(T, obj, leave, enter)
        basis[leave] = enter


def lp_solve(lp: LinearProgram) -> LpSolution:
    """Solve ``lp`` by the two-phase simplex method.

    Returns an ``LpSolution`` whose status is certified by the phase-one
    value (infeasibility) or by an improving ray (unboundedness). Optimal
    points are basic feasible solutions and are re-checked against the
    original constraints before being returned.

    Raises
    ------
    NumericalBreakdown
        If a pivot decision hinges on entries below ``PIVOT_TOL`` or the
        final point violates the constraints beyond tolerance.
    """
    A, b, c = lp.A, lp.b, lp.c
    k, m = A.shape
    scale = 1.0 + np.abs(b).max()
    sign = np.where(b < 0, -1.0, 1.0)

    # phase one: artificial basis, maximize -sum(artificials)
    T = np.zeros((k, m + k + 1))
    T[:, :m] = A * sign[:, None]
    T[:, m : m + k] = np.eye(k)
    T[:, -1] = b * sign
    obj = np.zeros(m + k + 1)
    obj[:m] = T[:, :m].sum(axis=0)
    obj[-1] = T[:, -1].sum()
    basis = list(range(m, m + k))
    _run(T, obj, basis, m, 1e-10 * (1.0 + np.abs(obj[:m]).max()))
    if obj[-1] > FEAS_TOL * scale:
        return LpSolution(LpStatus.INFEASIBLE)

    # drive remaining artificials out; rows with no usable pivot are redundant
    keep = []
    for r in range(k):
        if basis[r] >= m:
            candidates = np.flatnonzero(np.abs(T[r, :m]) > PIVOT_TOL)
            if candidates.size == 0:
                continue
            enter = int(candidates[0])
            _pivot(T, obj, r, enter)
            basis[r] = enter
        keep.append(r)
    T = np.hstack([T[keep, :m], T[keep, -1:]])
    basis = [basis[r] for r in keep]

    cb = c[basis]
    obj = np.empty(m + 1)
    obj[:m] = c - cb @ T[:, :m]
    obj[-1] = -cb @ T[:, -1]
    if not _run(T, obj, basis, m, 1e-10 * (1.0 + np.abs(c).max())):
        return LpSolution(LpStatus.UNBOUNDED)

    z = np.zeros(m)
    z[basis] = T[:, -1]
    if z.min() < -NONNEG_TOL:
        raise NumericalBreakdown(f"basic solution has negative entry {z.min():.3e}")
    z = np.maximum(z, 0.0)
    residual = np.abs(A @ z - b).max()
    if residual > FEAS_TOL * scale:
        raise NumericalBreakdown(f"constraint residual {residual:.3e} after pivoting")
    return LpSolution(LpStatus.OPTIMAL, z, float(c @ z), tuple(sorted(basis)))
