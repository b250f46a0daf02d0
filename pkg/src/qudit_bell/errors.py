"""Exception hierarchy shared across the package."""


class QuditBellError(Exception):
    pass


class InvalidDimension(QuditBellError, ValueError):
    pass


class InvalidRank(QuditBellError, ValueError):
    pass


class InvalidArgument(QuditBellError, ValueError):
    pass


class InvalidPoint(QuditBellError, ValueError):
    pass


class ScenarioTooLarge(QuditBellError, ValueError):
    pass


class SolverFailure(QuditBellError, RuntimeError):
    """The LP solver hit its pivot cap or lost numerical consistency.

    Distinct from a "nonlocal" verdict: nothing is known about the behaviour.
    """
