class HypothesisViolation(ValueError):
    """A spectral hypothesis (H1-H4) fails for the supplied data."""

    def __init__(self, hypothesis: str, detail: str = ""):
        self.hypothesis = hypothesis
        super().__init__(f"{hypothesis} violated: {detail}" if detail else f"{hypothesis} violated")


class DomainError(ValueError):
    """Argument outside the region where the quantity is defined."""


class ConvergenceError(RuntimeError):
    """An iterative solve did not converge."""


class OutOfRange(ValueError):
    """Amplitude outside the continued range of a bound-state family."""
