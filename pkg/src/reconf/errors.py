"""Exception hierarchy shared by all reconf modules."""


class ReconfError(Exception):
    """Base class for every error raised by this package."""


class GraphError(ReconfError):
    pass


class NotConnected(GraphError):
    pass


class CycleSpaceTooLarge(GraphError):
    pass


class TooManyTrees(GraphError):
    pass


class TooLarge(GraphError):
    """Raised by the brute-force oracles when an instance exceeds their cap."""


class ParseError(ReconfError):
    pass


class ValidationError(ReconfError):
    """Network data violates a named rule.

    The rule name is kept in ``rule`` so callers can branch on it without
    parsing the message.
    """

    def __init__(self, rule, detail=None):
        self.rule = rule
        self.detail = detail
        super().__init__(rule if detail is None else f"{rule}: {detail}")


class PowerFlowError(ReconfError):
    pass


class Singular(PowerFlowError):
    pass


class NonConverged(PowerFlowError):
    def __init__(self, max_iter, residual):
        self.max_iter = max_iter
        self.residual = residual
        super().__init__(f"no convergence after {max_iter} iterations (residual {residual:.3e})")


class Infeasible(ReconfError):
    """No feasible topology was found by a search."""


class AllInfeasible(Infeasible):
    pass
