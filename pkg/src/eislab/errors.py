"""Exception types raised by eislab."""


class EislabError(Exception):
    pass


class PoleError(EislabError, ValueError):
    """Evaluation requested at a pole."""


class DomainError(EislabError, ValueError):
    """Argument outside the supported range."""


class PrecisionLossError(EislabError, ArithmeticError):
    """The requested evaluation would need an unreasonable number of terms."""


class FeasibilityError(EislabError, RuntimeError):
    """Predicted enumeration work exceeds the configured cap."""

    def __init__(self, message: str, predicted: float):
        super().__init__(f"{message} (predicted work {predicted:.3g})")
        self.predicted = predicted


class IterationLimitError(EislabError, RuntimeError):
    """An iteration that provably terminates did not; indicates a bug."""


class KernelPropertyError(EislabError, AssertionError):
    """A constructed test kernel violates one of its required properties."""
