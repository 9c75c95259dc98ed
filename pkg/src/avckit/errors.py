"""Exception taxonomy shared across the toolkit.

Each class maps to one CLI exit code so library failures surface as
distinguishable process statuses (see cli.py).
"""


class AvckitError(Exception):
    """Base class for all toolkit errors."""


class ChannelFormatError(AvckitError):
    """Malformed channel description: bad shapes, rows, or field values."""


class InfeasibleError(AvckitError):
    """A constraint set (input, state, or type class) is empty."""


class SolverError(AvckitError):
    """An iterative solver exhausted its budget without certifying its target."""


class GuardExceeded(AvckitError):
    """A desk-scale resource guard tripped (state-space or enumeration size)."""
