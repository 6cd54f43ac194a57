"""Exception types shared across the package.

Every error carries a stable machine-readable ``code`` so the CLI can
emit one-line parsable diagnostics.
"""


class LatSpecError(Exception):
    code = "error"


class RankMismatchError(LatSpecError):
    code = "rank-mismatch"


class SingularBasisError(LatSpecError):
    code = "singular-basis"


class PreconditionError(LatSpecError):
    code = "precondition"


class BudgetError(LatSpecError):
    """An enumeration exceeded its configured budget.

    ``partial`` holds whatever was computed before the cap was hit (or
    None when the budget check fires up front).
    """

    code = "budget-exceeded"

    def __init__(self, message, cap=None, required=None, partial=None):
        super().__init__(message)
        self.cap = cap
        self.required = required
        self.partial = partial


class OracleCapError(LatSpecError):
    code = "oracle-cap"


class WindowError(LatSpecError):
    code = "window"


class UnsupportedSystemError(LatSpecError):
    code = "unsupported-system"


class SchemaError(LatSpecError):
    code = "schema"
