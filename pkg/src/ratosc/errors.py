"""Exception hierarchy shared by all modules."""


class RatoscError(Exception):
    """Base class for errors raised by this package."""


class SingularStateError(RatoscError, ValueError):
    """A term k_i / x_i**2 was requested at x_i == 0 with k_i != 0."""


class CaseMismatchError(RatoscError, ValueError):
    """Parameters do not match the registered case formula."""


class DegreeLimitError(RatoscError, ValueError):
    """A symbolic expansion would exceed the configured degree limit."""


class NormalizationError(RatoscError, ArithmeticError):
    """The k -> 0 limit of a J3 candidate is not proportional to I3**2."""


class CrossCheckError(RatoscError, AssertionError):
    """Two independent evaluation paths disagree."""


class IntegrationError(RatoscError, RuntimeError):
    """Base class for trajectory integration failures."""


class StepFailureError(IntegrationError):
    """The integrator could not meet the requested tolerance."""


class SingularityApproachError(IntegrationError):
    """A coordinate with a centrifugal barrier came too close to zero."""


class NoClosureError(IntegrationError):
    """No return to the initial state was found within the search horizon."""
