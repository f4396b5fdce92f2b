"""Exception hierarchy shared by all modules."""


class ExtremalLabError(Exception):
    pass


class DomainError(ExtremalLabError, ValueError):
    """Input outside the domain of a formula (pole, non-positive argument, bad range)."""


class EllipticityViolation(ExtremalLabError):
    pass


class BoundaryDivergence(ExtremalLabError):
    """Exterior mass requested at (or numerically on) the boundary of the interval."""


class UnsupportedGrid(ExtremalLabError):
    pass


class GridMismatch(ExtremalLabError):
    pass


class TailDivergence(ExtremalLabError):
    pass


class ConstraintViolation(ExtremalLabError):
    """Nonlinearity evaluated outside its admissible box (MEMS quenching)."""


class NoSolution(ExtremalLabError):
    """Solver failed to produce a minimal solution; beyond the fold in practice."""


class ConstraintHit(NoSolution):
    pass


class InfeasibleStart(ExtremalLabError):
    pass


class NeedMoreRecords(ExtremalLabError):
    pass


class NumericalFailure(ExtremalLabError):
    pass
