"""Currency-flow spending networks: optimal spending and real prices."""

from .errors import (
    AllInfeasible,
    InvalidNetwork,
    NoProvider,
    NumericalBreakdown,
    Reducible,
    SingularSystem,
    SpendnetError,
    ZeroMarginalUtility,
    ZeroPrice,
)
from .lp import LinearProgram, LpSolution, LpStatus, lp_solve
from .netmodel import SpendingNetwork, ValidationReport, check_cd, is_irreducible, load_network, save_network, validate
from .optimizer import OptimizationOutcome, build_inner_lp, evaluate_column, myopic_column, optimize_spending
from .realprice import (
    DynamicSpendingSetup,
    RealPriceResult,
    finite_diff_real_price,
    marginal_utilities,
    real_price_dynamic,
    real_price_fixed,
)
from .stationary import (
    StationaryDistribution,
    UtilityReport,
    asymptotic_utility,
    cesaro_average,
    iterate_currency,
    solve_stationary,
)

__version__ = "0.1.0"
