"""Stationary currency vectors, currency traces and asymptotic utility."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import Reducible, SingularSystem, ZeroPrice
from .netmodel import SpendingNetwork, is_irreducible

# the augmented system is rejected above this condition number
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class StationaryDistribution:
    x: np.ndarray
    residual: float
    total: float
    method: str

    @property
    def shares(self) -> np.ndarray:
        """Stationary vector normalized to unit total."""
        return self.x / self.total


@dataclass(frozen=True)
class UtilityReport:
    agent: int
    W: float
    per_provider: np.ndarray


def _emit(P, x, total, method):
    x = np.where(x < 0, 0.0, x)
    x = x * (total / x.sum())
    xhat = x / total
    residual = float(np.abs(P @ xhat - xhat).max())
    return StationaryDistribution(x, residual, total, method)


def default_drop_row(P) -> int:
    return int(np.argmax(np.abs(np.diag(P) - 1.0)))


def stationary_system(P, total=1.0, drop=None):
    """Augmented linear system ``M x = r`` whose solution is the stationary vector.

    The balance equations ``(P - I) x = 0`` are linearly dependent, so one of
    them (by default the row with the largest ``|P[i, i] - 1|``) is replaced
    by the sum constraint ``sum(x) = total``.
    """
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    M = P - np.eye(n)
    if drop is None:
        drop = default_drop_row(P)
    r = np.zeros(n)
    M[drop] = 1.0
    r[drop] = total
    return M, r


def _direct(P, total):
    M, r = stationary_system(P, total)
    try:
        cond = np.linalg.cond(M)
        if not np.isfinite(cond) or cond > MAX_CONDITION:
            raise SingularSystem(f"stationary system condition number {cond:.3e}")
        return np.linalg.solve(M, r)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from None


def power_iteration(net: SpendingNetwork, tol=1e-13, max_steps=100_000) -> StationaryDistribution:
    """Iterate ``x <- P x`` until successive iterates differ by at most ``tol`` (sup-norm, unit total).

    Periodic chains never settle; use :func:`cesaro_average` for those.
    """
    P = net.P
    x = net.x0 / net.total
    for _ in range(max_steps):
        nxt = P @ x
        if np.abs(nxt - x).max() <= tol:
            x = nxt
            break
        x = nxt
    return _emit(P, x * net.total, net.total, "power")


def solve_stationary(net: SpendingNetwork, tol=1e-10, method="direct", steps=100_000) -> StationaryDistribution:
    """Unique stationary vector of an irreducible network, scaled to ``net.total``.

    Parameters
    ----------
    net : SpendingNetwork
    tol : float
        Bound on ``max|P x - x|`` for the unit-total vector.
    method : {"direct", "power", "cesaro"}
        ``direct`` solves the augmented linear system; the other two are
        iterative and mainly serve as cross-checks.
    steps : int
        Iteration budget for the iterative methods.

    Raises
    ------
    Reducible
        If ``net.P`` is not irreducible.
    SingularSystem
        If the direct system is numerically rank deficient or the solution
        misses ``tol``.
    """
    if not is_irreducible(net.P):
        raise Reducible("spending matrix is reducible; stationary vector is not unique")
    if method == "direct":
        out = _emit(net.P, _direct(net.P, net.total), net.total, "direct")
    elif method == "power":
        out = power_iteration(net, tol=min(tol, 1e-13), max_steps=steps)
    elif method == "cesaro":
        out = _emit(net.P, cesaro_average(iterate_currency(net, steps)), net.total, "cesaro")
        return out
    else:
        raise ValueError(f"unknown method {method!r}")
    if out.residual > tol:
        raise SingularSystem(f"{method} stationary residual {out.residual:.3e} exceeds {tol:.1e}")
    return out


def iterate_currency(net: SpendingNetwork, steps: int) -> np.ndarray:
    """Currency trace ``[x0, P x0, ..., P^steps x0]`` as a ``(steps + 1, n)`` array."""
    if steps < 1:
        raise ValueError("steps must be positive")
    P = net.P
    out = np.empty((steps + 1, net.n))
    out[0] = net.x0
    for t in range(steps):
        out[t + 1] = P @ out[t]
    return out


def cesaro_average(trace) -> np.ndarray:
    trace = np.asarray(trace, dtype=float)
    if trace.ndim != 2 or trace.shape[0] == 0:
        raise ValueError("trace must be a non-empty sequence of vectors")
    return trace.mean(axis=0)


def write_trace(trace, path) -> None:
    trace = np.asarray(trace)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"x_{i + 1}" for i in range(trace.shape[1])])
        for t, row in enumerate(trace):
            w.writerow([t] + [format(v, ".17g") for v in row])


def asymptotic_utility(net: SpendingNetwork, x: StationaryDistribution, agent: int) -> UtilityReport:
    """Long-run utility per episode ``x_j * sum_i P[i, j] U[i, j] / C[i, j]``."""
    j = agent
    if np.any((net.P[:, j] > 0) & (net.C[:, j] <= 0)):
        raise ZeroPrice(f"agent {j} spends on a provider with non-positive price")
    per_provider = x.x[j] * net.P[:, j] * net.utility_ratios(j)
    return UtilityReport(j, float(per_provider.sum()), per_provider)
