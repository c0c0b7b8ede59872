"""Spending-network data model, validation and irreducibility checks.

A network of ``n`` agents is described by four arrays:

* ``P[i, j]`` -- fraction of agent ``j``'s currency spent on agent ``i``
  (columns sum to one),
* ``U[i, j]`` -- utility agent ``j`` gets per unit bought from agent ``i``,
* ``C[i, j]`` -- label price agent ``i`` charges agent ``j`` per unit,
* ``x0`` -- initial currency holdings.

Indices are 0-based throughout the library; the CLI converts from the
1-based numbering used for agents in prose.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import InvalidNetwork, ZeroPrice

COLUMN_TOL = 1e-9


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpendingNetwork:
    """Immutable ``(P, U, C, x0)`` economy.

    Columns of ``P`` whose sum is within ``COLUMN_TOL`` of one are
    renormalized on construction. Nothing else is checked here; call
    :func:`validate` (or :meth:`require_valid`) for the full rule set.
    """

    P: np.ndarray
    U: np.ndarray
    C: np.ndarray
    x0: np.ndarray

    def __post_init__(self):
        P = np.array(self.P, dtype=float)
        if P.ndim == 2 and P.shape[0] == P.shape[1] and P.size:
            sums = P.sum(axis=0)
            close = np.abs(sums - 1.0) <= COLUMN_TOL
            P[:, close] /= sums[close]
        object.__setattr__(self, "P", _frozen(P))
        object.__setattr__(self, "U", _frozen(self.U))
        object.__setattr__(self, "C", _frozen(self.C))
        object.__setattr__(self, "x0", _frozen(self.x0))

    @property
    def n(self) -> int:
        return self.P.shape[0]

    @property
    def total(self) -> float:
        """Conserved total currency ``||x0||_1``."""
        return float(np.abs(self.x0).sum())

    def with_column(self, j: int, column) -> "SpendingNetwork":
        """Copy of the network with agent ``j``'s spending column replaced."""
        P = self.P.copy()
        P[:, j] = column
        return SpendingNetwork(P, self.U, self.C, self.x0)

    def with_total(self, total: float) -> "SpendingNetwork":
        """Copy with ``x0`` rescaled so that its sum is ``total``."""
        return SpendingNetwork(self.P, self.U, self.C, self.x0 * (total / self.total))

    def utility_ratios(self, j: int) -> np.ndarray:
        """``U[i, j] / C[i, j]`` for every provider ``i``; zero where ``U`` is zero."""
        u, c = self.U[:, j], self.C[:, j]
        if np.any((u > 0) & (c <= 0)):
            bad = np.flatnonzero((u > 0) & (c <= 0)).tolist()
            raise ZeroPrice(f"agent {j} buys from {bad} at non-positive price with positive utility")
        out = np.zeros_like(u)
        np.divide(u, c, out=out, where=u > 0)
        return out

    def require_valid(self) -> "SpendingNetwork":
        report = validate(self)
        if not report.ok:
            raise InvalidNetwork(report.summary(), report)
        return self

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "P": self.P.tolist(),
            "U": self.U.tolist(),
            "C": self.C.tolist(),
            "x0": self.x0.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SpendingNetwork":
        try:
            net = cls(data["P"], data["U"], data["C"], data["x0"])
        except KeyError as exc:
            raise InvalidNetwork(f"network definition lacks field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise InvalidNetwork(f"malformed network definition: {exc}") from None
        if "n" in data and data["n"] != net.n:
            raise InvalidNetwork(f"declared n={data['n']!r} but P has {net.n} rows")
        return net


def load_network(path) -> SpendingNetwork:
    """Read a JSON network definition (``n``, ``P``, ``U``, ``C``, ``x0``)."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidNetwork(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise InvalidNetwork(f"{path}: top-level JSON value must be an object")
    return SpendingNetwork.from_dict(data)


def save_network(net: SpendingNetwork, path) -> None:
    Path(path).write_text(json.dumps(net.to_dict(), indent=2) + "\n")


@dataclass(frozen=True)
class Violation:
    rule: str
    message: str
    indices: tuple = ()


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(f"{v.rule}: {v.message}" for v in self.violations)


def validate(net: SpendingNetwork) -> ValidationReport:
    """Collect every broken model rule; never raises on bad content."""
    out = []
    P, U, C, x0 = net.P, net.U, net.C, net.x0
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
        return ValidationReport((Violation("shape", f"P must be a non-empty square matrix, got {P.shape}"),))
    n = P.shape[0]
    for name, arr, shape in (("U", U, (n, n)), ("C", C, (n, n)), ("x0", x0, (n,))):
        if arr.shape != shape:
            out.append(Violation("shape", f"{name} has shape {arr.shape}, expected {shape}"))
    if out:
        return ValidationReport(tuple(out))
    for name, arr in (("P", P), ("U", U), ("C", C), ("x0", x0)):
        if not np.isfinite(arr).all():
            out.append(Violation("finite", f"{name} has non-finite entries",
                                 tuple(map(tuple, np.argwhere(~np.isfinite(arr))))))
    if out:
        return ValidationReport(tuple(out))

    bad = np.flatnonzero(np.abs(P.sum(axis=0) - 1.0) > COLUMN_TOL)
    for j in bad:
        out.append(Violation("column-stochastic", f"column {j} of P sums to {P[:, j].sum():.12g}", (int(j),)))
    for name, arr in (("P", P), ("U", U), ("x0", x0)):
        neg = np.argwhere(arr < 0)
        if neg.size:
            out.append(Violation(f"nonnegative-{name}", f"{name} has negative entries",
                                 tuple(tuple(int(v) for v in idx) for idx in neg)))
    for i, j in np.argwhere((C <= 0) & (U > 0)):
        out.append(Violation("zero-price", f"zero price with positive utility at C[{i}][{j}]", (int(i), int(j))))
    for i, j in np.argwhere((C <= 0) & (U <= 0) & (P > 0)):
        out.append(Violation("zero-price", f"zero price with positive spending at C[{i}][{j}]", (int(i), int(j))))
    if not x0.sum() > 0:
        out.append(Violation("positive-total", "initial currency must have a positive total"))
    return ValidationReport(tuple(out))


def _as_square(P) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {P.shape}")
    return P


def is_irreducible(P) -> bool:
    """True iff the spending graph (edge ``j -> i`` when ``P[i, j] > 0``) is strongly connected."""
    P = _as_square(P)
    if P.shape[0] <= 1:
        return True
    ncomp, _ = connected_components(P.T > 0, directed=True, connection="strong")
    return ncomp == 1


def check_cd(P) -> bool:
    """Sufficient irreducibility test built from submatrices and cross-spending.

    For every agent ``j``: the matrix with row and column ``j`` removed must
    be irreducible, and there must be some ``k != j`` with ``P[j, k] > 0``
    together with some ``l != k`` with ``P[l, j] > 0``. A 1x1 submatrix counts
    as irreducible.
    """
    P = _as_square(P)
    n = P.shape[0]
    if n < 2:
        raise ValueError("condition CD needs at least two agents")
    for j in range(n):
        rest = [i for i in range(n) if i != j]
        if not is_irreducible(P[np.ix_(rest, rest)]):
            return False
        ks = [k for k in rest if P[j, k] > 0]
        if not any(P[l, j] > 0 for k in ks for l in range(n) if l != k):
            return False
    return True
