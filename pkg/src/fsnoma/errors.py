"""Exception hierarchy shared by all modules."""


class FsnomaError(Exception):
    """Base class for library errors."""


class DomainError(FsnomaError, ValueError):
    """Argument outside the supported domain."""


class TruncationError(FsnomaError, ArithmeticError):
    """A series did not meet its tolerance within ``max_terms``."""


class ConvergenceError(FsnomaError, ArithmeticError):
    """A numerical integral or contour evaluation did not converge."""


class PoleCollisionError(ConvergenceError):
    """No admissible Mellin-Barnes contour separates the pole families."""


class ConstraintError(FsnomaError, ValueError):
    """A structural model constraint is violated."""
