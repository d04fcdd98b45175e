"""Error hierarchy shared across the package.

Each error carries the process exit code the CLI maps it to, so command
wrappers do not need a lookup table.
"""


class RobochargeError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(RobochargeError):
    """Invalid or contradictory configuration input."""

    exit_code = 2


class DataError(RobochargeError):
    """Malformed or unusable session/scenario data."""

    exit_code = 3


class SolverError(RobochargeError):
    """Solver backend failure or an unexpectedly infeasible model."""

    exit_code = 4
