class DomainError(ValueError):
    """Argument outside the set where the quantity is defined."""


class ParameterError(ValueError):
    """Operator or model parameters violate a standing assumption."""


class ConvergenceError(RuntimeError):
    """A limit or certified sum did not reach the requested accuracy.

    ``best`` carries the best accuracy (bound or spread) that was achieved.
    """

    def __init__(self, message: str, best: float = float("nan")):
        super().__init__(message)
        self.best = best
