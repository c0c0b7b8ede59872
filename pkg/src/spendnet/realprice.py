"""Real prices seen by a purchasing agent.

The real price of provider ``k`` for buyer ``j`` is ``U[k, j] / (dW/da)``:
the per-unit price at which one extra unit of currency spent on ``k`` in a
single episode would buy as much utility as that currency eventually adds to
``j``'s long-run utility per episode ``W``.

Two spending behaviours are covered. Under a *fixed* pattern the buyer scales
all its spending proportionally, so the spending matrix is unchanged and only
the total currency grows. Under a *dynamic* pattern the buyer spends amounts
``a`` (column ``a / sum(a)``) and the extra currency goes to ``k`` alone,
which tilts the column; the sensitivity of the stationary vector then comes
from differentiating the stationary equations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Reducible, SingularSystem, ZeroMarginalUtility
from .netmodel import SpendingNetwork, is_irreducible
from .stationary import MAX_CONDITION, default_drop_row, solve_stationary, stationary_system


@dataclass(frozen=True)
class DynamicSpendingSetup:
    """Buyer ``agent`` spends amounts ``a``; the probed provider is ``target_k``.

    ``total`` is the network's currency before the extra spending; ``None``
    means use the network's own total.
    """

    a: np.ndarray
    target_k: int = 1
    agent: int = 0
    total: float | None = None

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        if a.ndim != 1 or a.min() < 0 or not a.sum() > 0:
            raise ValueError("spending amounts must be nonnegative with a positive sum")
        if not 0 <= self.target_k < a.size or not 0 <= self.agent < a.size:
            raise ValueError("agent and provider indices must address entries of a")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def column(self) -> np.ndarray:
        return self.a / self.a.sum()

    def for_provider(self, k: int) -> "DynamicSpendingSetup":
        return DynamicSpendingSetup(self.a, k, self.agent, self.total)

    def apply(self, net: SpendingNetwork) -> SpendingNetwork:
        """Network with the buyer's column set to ``a / sum(a)`` and total set to ``total``."""
        out = net.with_column(self.agent, self.column)
        if self.total is not None:
            out = out.with_total(self.total)
        return out


@dataclass(frozen=True)
class RealPriceResult:
    mode: str
    rp: float
    dW_da: float
    dx_da: np.ndarray
    label_price: float
    agent: int
    provider: int
    negative_marginal: bool = False
    literal: bool = False


def _finish(mode, net, j, k, dW, dx, literal=False):
    if dW == 0 or not np.isfinite(dW):
        raise ZeroMarginalUtility(f"marginal utility of agent {j} w.r.t. spending on {k} is {dW!r}")
    rp = net.U[k, j] / dW
    return RealPriceResult(mode, float(rp), float(dW), dx, float(net.C[k, j]), j, k, bool(dW < 0), literal)


def _require_irreducible(P):
    if not is_irreducible(P):
        raise Reducible("spending matrix is reducible")


def real_price_fixed(net: SpendingNetwork, agent: int, provider: int, literal_formula=False) -> RealPriceResult:
    """Real price of ``provider`` for ``agent`` when the buyer keeps its spending ratios.

    Extra currency scales the stationary vector proportionally, so
    ``dx/da = xhat`` (the unit-total stationary vector) and
    ``dW/da = xhat_j * sum_i P[i, j] U[i, j] / C[i, j]``.

    ``literal_formula=True`` drops the allocation weight ``P[i, j]``
    from the sum. That variant is kept only for side-by-side comparison and
    is not the default.
    """
    j, k = agent, provider
    _require_irreducible(net.P)
    xhat = solve_stationary(net).shares
    g = net.utility_ratios(j)
    weights = np.ones(net.n) if literal_formula else net.P[:, j]
    dW = xhat[j] * float(weights @ g)
    return _finish("fixed", net, j, k, dW, xhat, literal=literal_formula)


def _column_derivative(a, k):
    s = a.sum()
    dc = -a / s**2
    dc[k] += 1.0 / s
    return dc


def dynamic_sensitivity(net: SpendingNetwork, setup: DynamicSpendingSetup, drop=None):
    """Return ``(x, dx/da_k)`` for the dynamic pattern.

    ``x`` is the stationary vector at the base spending; ``dx/da_k`` solves
    the differentiated balance equations

        (P - I) dx = -(dc/da_k) x_j,   sum(dx) = 1,

    where ``c = a / sum(a)`` is the buyer's column (it replaces whatever
    column ``net`` holds for the buyer). One balance row is
    replaced by the sum row: ``drop`` picks it, defaulting to the row with
    the largest ``|P[i, i] - 1|``.
    """
    j, k = setup.agent, setup.target_k
    base = setup.apply(net)
    _require_irreducible(base.P)
    x = solve_stationary(base).x
    row = default_drop_row(base.P) if drop is None else drop
    M, _ = stationary_system(base.P, 1.0, drop=row)
    rhs = -_column_derivative(setup.a, k) * x[j]
    rhs[row] = 1.0
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularSystem(f"sensitivity system condition number {cond:.3e}")
    return x, np.linalg.solve(M, rhs)


def real_price_dynamic(net: SpendingNetwork, setup: DynamicSpendingSetup, drop=None) -> RealPriceResult:
    """Instant real price of ``setup.target_k`` when the extra spending goes to it alone.

    With ``c = a / sum(a)`` and ``g_i = U[i, j] / C[i, j]``,

        dW/da_k = (dx_j/da_k) * (c @ g) + x_j * (dc/da_k @ g),

    where ``dc/da_k = (e_k - c) / sum(a)``. A negative ``dW/da_k`` (extra
    spending on ``k`` lowers the long-run utility) is reported as a negative
    real price with ``negative_marginal`` set.
    """
    j, k = setup.agent, setup.target_k
    x, dx = dynamic_sensitivity(net, setup, drop=drop)
    base = setup.apply(net)
    g = base.utility_ratios(j)
    dW = dx[j] * float(setup.column @ g) + x[j] * float(_column_derivative(setup.a, k) @ g)
    return _finish("dynamic", base, j, k, dW, dx)


def _raw_stationary(P, total):
    # no irreducibility or sign checks: perturbed columns may dip below zero
    M, r = stationary_system(P, total)
    return np.linalg.solve(M, r)


def finite_diff_real_price(net: SpendingNetwork, setup: DynamicSpendingSetup, epsilon=None, mode="dynamic") -> RealPriceResult:
    """Central-difference estimate of the real price, independent of the sensitivity system.

    For ``delta`` in ``(+eps, -eps)`` the buyer's spending on ``k`` becomes
    ``a_k + delta`` and the total becomes ``T + delta``; the stationary
    vector is re-solved and ``W(delta) = x_j * sum_i c_i g_i`` recomputed.
    With ``mode="fixed"`` the column is left alone and only the total moves.
    The default step is ``1e-6 * max(1, sum(a))``.
    """
    j, k = setup.agent, setup.target_k
    if mode == "dynamic":
        base = setup.apply(net)
    elif mode == "fixed":
        base = net if setup.total is None else net.with_total(setup.total)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    _require_irreducible(base.P)
    if epsilon is None:
        epsilon = 1e-6 * max(1.0, float(setup.a.sum()))
    g = base.utility_ratios(j)
    T = base.total

    def W(delta):
        P = base.P.copy()
        if mode == "dynamic":
            a = setup.a.copy()
            a[k] += delta
            P[:, j] = a / a.sum()
        x = _raw_stationary(P, T + delta)
        return x[j] * float(P[:, j] @ g), x

    (w_plus, x_plus), (w_minus, x_minus) = W(epsilon), W(-epsilon)
    dW = (w_plus - w_minus) / (2.0 * epsilon)
    dx = (x_plus - x_minus) / (2.0 * epsilon)
    return _finish(mode, base, j, k, dW, dx)


def marginal_utilities(net: SpendingNetwork, setup: DynamicSpendingSetup, oracle=False) -> np.ndarray:
    """``dW/da_m`` for every provider ``m`` under the dynamic pattern."""
    fn = finite_diff_real_price if oracle else real_price_dynamic
    out = np.empty(net.n)
    for m in range(net.n):
        try:
            out[m] = fn(net, setup.for_provider(m)).dW_da
        except ZeroMarginalUtility:
            out[m] = 0.0
    return out
