"""Exception hierarchy shared by every module.

Each error carries a short ``code`` used in sweep CSV status cells and to
pick the CLI exit status.
"""


class SpendnetError(Exception):
    code = "error"
    #: 1 = invalid input, 2 = numerical failure
    exit_status = 2


class InvalidNetwork(SpendnetError):
    code = "invalid"
    exit_status = 1

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class Reducible(SpendnetError):
    code = "reducible"


class SingularSystem(SpendnetError):
    code = "singular"


class NumericalBreakdown(SpendnetError):
    code = "breakdown"


class ZeroPrice(SpendnetError):
    code = "zero-price"
    exit_status = 1


class NoProvider(SpendnetError):
    code = "no-provider"
    exit_status = 1


class AllInfeasible(SpendnetError):
    code = "all-infeasible"


class ZeroMarginalUtility(SpendnetError):
    code = "zero-marginal"
