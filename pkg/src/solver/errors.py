# src/solver/errors.py
from typing import Iterable, List


class SolverError(Exception):
    """Base class for everything the solver raises on purpose."""


class GameValidationError(SolverError):
    def __init__(self, violations: Iterable[str]):
        self.violations: List[str] = list(violations)
        super().__init__("; ".join(self.violations) or "invalid game")


class ContractViolation(SolverError, ValueError):
    """A caller broke an operation's precondition."""


class InvariantViolation(SolverError, AssertionError):
    """Internal bookkeeping went wrong (should never happen)."""


class OracleInfeasible(SolverError):
    def __init__(self, budget: int, size: int):
        self.budget = budget
        self.size = size
        super().__init__(f"oracle infeasible: product exceeds budget ({size} > {budget} vertices)")


class DimacsError(SolverError, ValueError):
    pass


class SatBoundExceeded(SolverError):
    pass
