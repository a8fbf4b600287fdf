class Unstable(ValueError):
    """Raised when a relay buffer has no limiting distribution (psi <= 1)."""


class NegativeEntry(ArithmeticError):
    """Raised when a transition matrix built from the current iterate is not stochastic."""
