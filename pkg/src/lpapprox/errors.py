"""Exception hierarchy shared by all modules.

The CLI maps :class:`ValidationError` (and its subclasses, plus
:class:`ParseError` and :class:`DomainError`) to exit code 2 and
:class:`CapacityError` to exit code 3.
"""


class LpApproxError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(LpApproxError, ValueError):
    """An object violates one of its structural invariants.

    ``invariant`` names the violated rule (e.g. ``"acyclicity"``).
    """

    def __init__(self, invariant, message=None):
        self.invariant = invariant
        super().__init__(f"{invariant}: {message}" if message else invariant)


class ParseError(LpApproxError, ValueError):
    def __init__(self, message, position=None):
        self.position = position
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


class InputShapeError(LpApproxError, ValueError):
    pass


class InvalidNumericError(LpApproxError, ValueError):
    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message)


class DomainError(LpApproxError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class UnsupportedSmoothnessError(DomainError):
    pass


class CapacityError(LpApproxError):
    """A computation would exceed a configured size cap."""


class DisjointnessError(ValidationError):
    def __init__(self, first, second):
        self.pair = (first, second)
        super().__init__("disjointness", f"cubes {first} and {second} overlap")


class EmptyInputError(ValidationError):
    def __init__(self, message="at least one cube is required"):
        super().__init__("non-empty", message)


class OracleContractError(ValidationError):
    def __init__(self, message):
        super().__init__("monotone oracle", message)


class ProfileContractError(ValidationError):
    def __init__(self, message):
        super().__init__("monotone profile", message)


class UnsupportedExactnessError(LpApproxError):
    """Exact computation is impossible for the given (non-dyadic) input."""
