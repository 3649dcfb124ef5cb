"""Exception types shared across the package.

The CLI maps these to exit codes, so estimator and oracle code should raise
these rather than bare ValueError when the condition is one a user can hit
from the command line.
"""


class InputError(ValueError):
    """A network document or user parameter is malformed or inconsistent."""


class PlanInvalidError(ValueError):
    """The sampling plan cannot be built, e.g. rho <= 0 so the repair-rate
    margin assumption is violated."""


class CapExceededError(ValueError):
    """An exhaustive enumeration (states, subsets, cutsets) would exceed its
    configured cap."""


class EstimationError(ValueError):
    """The estimator cannot run, e.g. every clause has probability zero."""
