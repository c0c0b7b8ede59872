"""Three-agent alpha sweeps for the utility and real-price curves.

Agents 2 and 3 keep fixed spending columns ``(alpha, 0.98 - alpha, 0.02)``
and ``(0.5, 0.01, 0.49)``; agent 1 is the buyer under study. Scenarios:

``fig1_utility``
    optimal versus myopic long-run utility of agent 1 on the first data set,
``fig2_realprice``
    dynamic real prices of agents 2 and 3 seen by agent 1 on the second set,
``fig3_marginal``
    the matching marginal utilities ``dW/da_2`` and ``dW/da_3``.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from importlib import resources

import numpy as np

from .errors import SpendnetError
from .netmodel import SpendingNetwork, load_network
from .optimizer import DEFAULT_GRID, DEFAULT_REFINE, evaluate_column, myopic_column, optimize_spending
from .realprice import DynamicSpendingSetup, marginal_utilities, real_price_dynamic

SCENARIOS = ("fig1_utility", "fig2_realprice", "fig3_marginal")
SCENARIO_ALIASES = {"fig1": "fig1_utility", "fig2": "fig2_realprice", "fig3": "fig3_marginal"}

AGENT3_COLUMN = (0.5, 0.01, 0.49)
BASE_SPENDING = (0.0, 2.0, 0.0)

CSV_COLUMNS = ("alpha", "utility_optimal", "utility_myopic", "rp_2", "rp_3", "dW_da2", "dW_da3", "status")


def builtin_network(name: str) -> SpendingNetwork:
    """Bundled network ``"5.1"`` (optimizer data) or ``"5.2"`` (real-price data)."""
    fname = {"5.1": "paper_5_1.json", "5.2": "paper_5_2.json"}[name]
    with resources.as_file(resources.files("spendnet") / "data" / fname) as path:
        return load_network(path)


def agent2_column(alpha: float) -> np.ndarray:
    return np.array([alpha, 1.0 - alpha - 0.02, 0.02])


def with_alpha(net: SpendingNetwork, alpha: float) -> SpendingNetwork:
    """Install the fixed columns of agents 2 and 3 for a given ``alpha``."""
    P = net.P.copy()
    P[:, 1] = agent2_column(alpha)
    P[:, 2] = AGENT3_COLUMN
    return SpendingNetwork(P, net.U, net.C, net.x0)


def default_alpha_grid() -> np.ndarray:
    return np.arange(1, 98) / 100.0


def parse_alpha_range(text: str) -> np.ndarray:
    """Parse ``lo:step:hi`` (inclusive of ``hi`` up to rounding)."""
    try:
        lo, step, hi = (float(t) for t in text.split(":"))
    except ValueError:
        raise ValueError(f"expected lo:step:hi, got {text!r}") from None
    if step <= 0 or hi < lo:
        raise ValueError(f"empty alpha range {text!r}")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(count), 12)


@dataclass(frozen=True)
class SweepConfig:
    alpha_grid: tuple
    scenario: str
    network_file: str | None = None
    network: SpendingNetwork | None = None
    setup: DynamicSpendingSetup | None = None
    grid_points: int = DEFAULT_GRID
    refine_rounds: int = DEFAULT_REFINE

    def __post_init__(self):
        scenario = SCENARIO_ALIASES.get(self.scenario, self.scenario)
        if scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        object.__setattr__(self, "scenario", scenario)
        grid = tuple(float(a) for a in self.alpha_grid)
        if not grid:
            raise ValueError("alpha grid is empty")
        if any(not 0.0 < a <= 0.98 for a in grid):
            raise ValueError("alpha must lie in (0, 0.98] to keep agent 2's column nonnegative")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("alpha grid must be strictly increasing")
        object.__setattr__(self, "alpha_grid", grid)
        if self.network is None and self.network_file is None:
            raise ValueError("give either network or network_file")

    def base_network(self) -> SpendingNetwork:
        if self.network is not None:
            return self.network
        return load_network(self.network_file).require_valid()


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    utility_optimal: float | None = None
    utility_myopic: float | None = None
    rp_2: float | None = None
    rp_3: float | None = None
    dW_da2: float | None = None
    dW_da3: float | None = None
    status: str = "ok"

    @property
    def ratio(self) -> float | None:
        if self.utility_optimal is None or not self.utility_myopic:
            return None
        return self.utility_optimal / self.utility_myopic


def _row(scenario, base, alpha, setup, grid_points, refine_rounds) -> SweepRow:
    net = with_alpha(base, alpha)
    try:
        if scenario == "fig1_utility":
            outcome = optimize_spending(net, 0, grid_points, refine_rounds)
            myopic = evaluate_column(net, 0, myopic_column(net, 0))
            return SweepRow(alpha, utility_optimal=outcome.W_star, utility_myopic=myopic)
        if scenario == "fig2_realprice":
            rp2 = real_price_dynamic(net, setup.for_provider(1)).rp
            rp3 = real_price_dynamic(net, setup.for_provider(2)).rp
            return SweepRow(alpha, rp_2=rp2, rp_3=rp3)
        marginal = marginal_utilities(net, setup)
        return SweepRow(alpha, dW_da2=float(marginal[1]), dW_da3=float(marginal[2]))
    except SpendnetError as exc:
        return SweepRow(alpha, status=f"error:{exc.code}")


def _row_star(args):
    return _row(*args)


def run_sweep(cfg: SweepConfig, workers: int = 1) -> list[SweepRow]:
    """Evaluate the scenario at every alpha, in grid order.

    Failures are recorded per row in ``status`` instead of aborting. With
    ``workers > 1`` rows are computed in a process pool; the output is the
    same as a sequential run.
    """
    base = cfg.base_network()
    setup = cfg.setup or DynamicSpendingSetup(BASE_SPENDING, target_k=1, agent=0)
    jobs = [(cfg.scenario, base, a, setup, cfg.grid_points, cfg.refine_rounds) for a in cfg.alpha_grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_row_star, jobs))
    return [_row(*job) for job in jobs]


def _cell(value):
    return "" if value is None else format(value, ".17g")


def format_curves(rows) -> str:
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to write")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_cell(getattr(r, name)) for name in CSV_COLUMNS[:-1]] + [r.status])
    return buf.getvalue()


def write_curves(rows, path) -> None:
    """Write sweep rows as CSV with 17 significant digits and empty unused cells."""
    text = format_curves(rows)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def read_curves(path) -> list[SweepRow]:
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            kw = {f.name: (float(rec[f.name]) if rec[f.name] else None) for f in fields(SweepRow) if f.name not in ("alpha", "status")}
            out.append(SweepRow(float(rec["alpha"]), status=rec["status"], **kw))
    return out
