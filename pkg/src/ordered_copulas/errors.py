"""Exception hierarchy.

Every error carries a short ``code`` string; the CLI prints it and maps
the error to an exit status.
"""

from __future__ import annotations


class OrderedCopulaError(Exception):
    code = "error"


class InvalidInput(OrderedCopulaError, ValueError):
    code = "invalid-input"


class NotStochasticallyOrdered(OrderedCopulaError, ValueError):
    code = "not-stochastically-ordered"

    def __init__(self, message: str, witness: float | None = None):
        super().__init__(message)
        self.witness = witness


class IncompatibleCopula(OrderedCopulaError, ValueError):
    code = "incompatible-copula"

    def __init__(self, message: str, worst: float | None = None):
        super().__init__(message)
        self.worst = worst


class Unsupported(OrderedCopulaError):
    code = "unsupported"


class UnsupportedForDiscrete(Unsupported):
    code = "unsupported-for-discrete"


class WrongBranch(OrderedCopulaError):
    code = "wrong-branch"


class NoMaxEnt(OrderedCopulaError):
    code = "no-maxent"


class EntropyUndefined(OrderedCopulaError):
    code = "entropy-undefined"
