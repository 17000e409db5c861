"""Exception types shared across the analysis and simulation modules."""


class NamingGameError(Exception):
    """Base class for all package errors."""


class DegeneratePopulationError(NamingGameError):
    """No normal agents remain, so normal-agent quantities are undefined."""


class UndefinedRatioError(NamingGameError):
    """An adjacent-density ratio was requested where some density is zero."""


class NumericalFailureError(NamingGameError):
    """An integration step violated the positivity or conservation guards."""


class SolverFailureError(NamingGameError):
    """A root search failed to converge within its iteration budget."""


class BranchMissingError(NamingGameError):
    """The requested steady-state branch does not exist at these parameters."""


class InvalidPopulationError(NamingGameError):
    """Agent counts cannot realize the requested population."""
