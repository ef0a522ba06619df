"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid user-supplied parameter or malformed input (CLI exit code 1)."""


class NumericError(RuntimeError):
    """Linear-algebra or iteration failure distinct from an infeasible verdict
    (CLI exit code 2)."""
