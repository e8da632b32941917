"""
Exception types raised by the lcu_walk package.

Every exception carries the process exit code the command-line front end
uses when the error escapes a command.
"""

from typing import Optional


class LcuWalkError(Exception):
    """Base class for all lcu_walk errors."""

    exit_code = 1


class ParameterError(LcuWalkError, ValueError):
    """A precondition on a numeric parameter was violated."""

    exit_code = 2


class IndexRangeError(ParameterError, IndexError):
    """An oracle was queried outside the matrix dimensions."""


class CapacityError(ParameterError):
    """A search ran past its hard cap (e.g. truncation order above K_CAP)."""


class HamiltonianFileError(LcuWalkError):
    """A Hamiltonian file could not be parsed or did not match the schema."""

    exit_code = 2


class HermiticityError(HamiltonianFileError):
    """The supplied matrix is not exactly Hermitian."""


class SparsityError(HamiltonianFileError):
    """A row holds more nonzero entries than the declared sparsity."""


class NumericError(LcuWalkError, ArithmeticError):
    """A numerical routine failed its own residual check."""


class VerificationError(LcuWalkError, AssertionError):
    """An invariant check failed.

    ``invariant`` names the violated property and ``seed`` the instance seed
    (if the instance was generated).
    """

    def __init__(self, message: str, invariant: str = "", seed: Optional[int] = None):
        super().__init__(message)
        self.invariant = invariant
        self.seed = seed

    def __str__(self) -> str:
        text = super().__str__()
        if self.invariant:
            text = f"[{self.invariant}] {text}"
        if self.seed is not None:
            text = f"{text} (seed={self.seed})"
        return text
