"""
Exceptions raised throughout gtllab. Every error is a ValueError so callers that only care about
"bad input" can keep catching that.
"""


class GtlLabError(ValueError):
    pass


class DomainError(GtlLabError):
    """Raised when a formula leaves its domain (log of a non-positive tau, negative radicand...)."""


class KindMismatchError(GtlLabError):
    """Raised when a state kind does not match the requested flow or representation."""


class ConfigError(GtlLabError):
    pass


class PreconditionError(GtlLabError):
    pass


class LaxClosureError(GtlLabError):
    """
    Raised when [L, M] has an entry outside the sparsity pattern of the representation, meaning
    the Lax pair does not close on its own coordinates.
    """
    def __init__(self, row: int, col: int, value: float, rep: str, order: str = "LM"):
        self.row = row; self.col = col
        self.value = value
        self.rep = rep; self.order = order
        bracket = "[L, M]" if order == "LM" else "[M, L]"
        super().__init__(f"{bracket} for {rep} is not closed: entry ({row}, {col}) = {value:.3e} lies "
                         f"outside the representation's sparsity pattern")


class ConvergenceError(GtlLabError):
    def __init__(self, message: str, iterations: int):
        self.iterations = iterations
        super().__init__(f"{message} (after {iterations} iterations)")


class IntegrationError(GtlLabError):
    def __init__(self, message: str, last_good_time: float):
        self.last_good_time = last_good_time
        super().__init__(f"{message}; last good time t={last_good_time:.17g}")


class RankDeficiencyError(GtlLabError):
    def __init__(self, order: int, nullity: int, residual: float):
        self.order = order; self.nullity = nullity
        self.residual = residual
        super().__init__(f"epsilon-order {order} system is inconsistent (nullity {nullity}, "
                         f"least-squares residual {residual:.3e})")
