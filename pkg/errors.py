class ConvergenceFailure(RuntimeError):
    """Raised when the 4x4 eigensolver does not produce valid eigenpairs."""


class NumericalDegeneracy(RuntimeError):
    """Raised when a real orthogonal eigenbasis cannot be extracted for KAK."""


class InvalidBox(ValueError):
    """Raised for partition boxes outside the r + k = 4 family."""


class IterationLimit(RuntimeError):
    """Raised when the simplex exceeds its pivot budget."""


class NoConvergence(RuntimeError):
    def __init__(self, message: str, best_x=None, best_residual: float | None = None) -> None:
        super().__init__(message)
        self.best_x = best_x
        self.best_residual = best_residual


class SegmentNoConvergence(NoConvergence):
    def __init__(
        self,
        message: str,
        segment: int | None = None,
        best_x=None,
        best_residual: float | None = None,
    ) -> None:
        super().__init__(message, best_x=best_x, best_residual=best_residual)
        self.segment = segment


class AssemblyMismatch(RuntimeError):
    def __init__(self, message: str, distance: float) -> None:
        super().__init__(message)
        self.distance = distance


class BudgetExhausted(RuntimeError):
    def __init__(self, message: str, sentences_tried: int, last_cost: float | None) -> None:
        super().__init__(message)
        self.sentences_tried = sentences_tried
        self.last_cost = last_cost


class InputError(ValueError):
    """Malformed ISA, target or decomposition input."""
