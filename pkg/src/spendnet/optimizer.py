"""Optimal spending column for one agent.

For agent ``j`` the long-run utility ``x_j * sum_i p_i U[i, j] / C[i, j]`` is
bilinear in the stationary vector ``x`` and the agent's column ``p``. Once
the agent's stationary share ``v = x_j`` is fixed the problem is a linear
program in the remaining shares and ``p``, so the search runs over ``v`` on
a grid (with local refinement) and solves one LP per examined share.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AllInfeasible, NoProvider, Reducible
from .lp import LinearProgram, lp_solve
from .netmodel import SpendingNetwork, is_irreducible
from .stationary import MAX_CONDITION, StationaryDistribution, asymptotic_utility, cesaro_average, iterate_currency, solve_stationary, stationary_system

DEFAULT_GRID = 1001
DEFAULT_REFINE = 3


@dataclass(frozen=True)
class GridPoint:
    v: float
    feasible: bool
    objective: float


@dataclass(frozen=True)
class OptimizationOutcome:
    agent: int
    column: np.ndarray
    x: np.ndarray
    W_star: float
    grid_trace: tuple[GridPoint, ...]
    result_irreducible: bool

    @property
    def share(self) -> float:
        return float(self.x[self.agent] / self.x.sum())


def myopic_column(net: SpendingNetwork, agent: int) -> np.ndarray:
    """Put all spending on the provider with the best utility-to-price ratio (lowest index on ties)."""
    ratios = net.utility_ratios(agent)
    if not ratios.max() > 0:
        raise NoProvider(f"no provider offers agent {agent} positive utility")
    column = np.zeros(net.n)
    column[int(np.argmax(ratios))] = 1.0
    return column


def build_inner_lp(net: SpendingNetwork, agent: int, share: float) -> LinearProgram:
    """LP over ``(x_i for i != agent, p_0..p_{n-1})`` with ``x_agent`` pinned to ``share``.

    Rows are: the other shares sum to ``1 - share``; one balance row
    ``sum_{k != j} P[i, k] x_k + share * p_i = x_i`` per agent ``i``; and the
    column sums to one. The objective is ``share * sum_i p_i U[i, j] / C[i, j]``.
    """
    n, j, v = net.n, agent, float(share)
    others = [i for i in range(n) if i != j]
    m = n - 1
    A = np.zeros((n + 2, m + n))
    b = np.zeros(n + 2)
    A[0, :m] = 1.0
    b[0] = 1.0 - v
    A[1 : n + 1, :m] = net.P[:, others]
    for pos, i in enumerate(others):
        A[1 + i, pos] -= 1.0
    A[1 : n + 1, m:] = v * np.eye(n)
    b[1 + j] = v
    A[n + 1, m:] = 1.0
    b[n + 1] = 1.0
    c = np.concatenate([np.zeros(m), v * net.utility_ratios(j)])
    return LinearProgram(c, A, b)


def _solve_share(net, agent, v):
    sol = lp_solve(build_inner_lp(net, agent, v))
    if not sol.optimal:
        return GridPoint(float(v), False, float("nan")), None
    return GridPoint(float(v), True, sol.objective * net.total), sol.z


def _anchor_shares(net, agent, columns):
    """Stationary share of ``agent`` under each candidate column.

    Reducible matrices are kept as long as the stationary vector is unique
    (a single closed class), which shows up as a well-conditioned system.
    """
    out = []
    for column in columns:
        P = net.P.copy()
        P[:, agent] = column
        M, r = stationary_system(P, 1.0)
        if np.linalg.cond(M) > MAX_CONDITION:
            continue
        x = np.linalg.solve(M, r)
        v = float(x[agent])
        if 0.0 <= v <= 1.0:
            out.append(v)
    return out


def optimize_spending(
    net: SpendingNetwork,
    agent: int,
    grid_points: int = DEFAULT_GRID,
    refine_rounds: int = DEFAULT_REFINE,
    extra_columns=None,
) -> OptimizationOutcome:
    """Maximize agent ``agent``'s asymptotic utility over its own spending column.

    The agent's unit-total stationary share ``v`` is scanned on an even grid
    of ``grid_points`` values in ``[0, 1]``. Each round of refinement then
    re-scans an interval half as wide as the previous one, centred on the
    incumbent, with the same number of points. Before refining, the shares
    induced by every pure column (all spending on one provider) and by any
    ``extra_columns`` are also examined, so the result is never worse than
    any of those columns. Ties between equal objectives go to the smaller
    share.

    Parameters
    ----------
    net : SpendingNetwork
        Columns other than ``agent`` are held fixed.
    agent : int
    grid_points : int
        Points per scan, at least 2.
    refine_rounds : int
    extra_columns : sequence of array_like, optional
        Additional columns whose induced shares are examined.

    Returns
    -------
    OptimizationOutcome
        ``x`` and ``W_star`` are reported at the network's total currency.
    """
    if grid_points < 2:
        raise ValueError("grid_points must be at least 2")
    if refine_rounds < 0:
        raise ValueError("refine_rounds must be non-negative")
    j = agent
    trace = []
    best = None  # (objective, v, z)

    def examine(values):
        nonlocal best
        for v in values:
            point, z = _solve_share(net, j, v)
            trace.append(point)
            if not point.feasible:
                continue
            if best is None or point.objective > best[0] or (point.objective == best[0] and point.v < best[1]):
                best = (point.objective, point.v, z)

    examine(np.linspace(0.0, 1.0, grid_points))
    pure = list(np.eye(net.n))
    extra = [np.asarray(c, dtype=float) for c in (extra_columns or ())]
    examine(_anchor_shares(net, j, pure + extra))
    if best is None:
        raise AllInfeasible(f"no examined share of agent {j} admits a feasible column")

    width = 1.0
    for _ in range(refine_rounds):
        width /= 2.0
        lo = min(max(best[1] - width / 2.0, 0.0), 1.0 - width)
        examine(np.linspace(lo, lo + width, grid_points))

    objective, v, z = best
    m = net.n - 1
    x = np.insert(z[:m], j, v)
    column = np.maximum(z[m:], 0.0)
    column /= column.sum()
    P = net.P.copy()
    P[:, j] = column
    irreducible = is_irreducible(P)
    if not irreducible:
        warnings.warn(f"optimal column for agent {j} makes the spending matrix reducible", RuntimeWarning)
    total = net.total
    return OptimizationOutcome(j, column, x * total, objective, tuple(trace), irreducible)


def evaluate_column(net: SpendingNetwork, agent: int, column, allow_reducible: bool = False, steps: int = 100_000) -> float:
    """Asymptotic utility of ``agent`` when it spends according to ``column``.

    Raises ``Reducible`` if the resulting spending matrix is reducible, unless
    ``allow_reducible`` is set, in which case the stationary vector is replaced
    by the Cesaro average of ``steps`` iterations from ``x0``.
    """
    column = np.asarray(column, dtype=float)
    if column.shape != (net.n,) or column.min() < 0 or abs(column.sum() - 1.0) > 1e-9:
        raise ValueError("column must be a nonnegative length-n vector summing to one")
    trial = net.with_column(agent, column)
    try:
        x = solve_stationary(trial)
    except Reducible:
        if not allow_reducible:
            raise Reducible(f"column {column.tolist()} makes the spending matrix reducible") from None
        avg = cesaro_average(iterate_currency(trial, steps))
        x = StationaryDistribution(avg, float(np.abs(trial.P @ avg - avg).max()), trial.total, "cesaro")
    return asymptotic_utility(trial, x, agent).W


def trace_rows(outcome: OptimizationOutcome):
    """Grid trace as ``(v, feasible, objective)`` string triples for CSV export."""
    for p in outcome.grid_trace:
        yield (format(p.v, ".17g"), "1" if p.feasible else "0", format(p.objective, ".17g") if p.feasible else "")
