"""Exception taxonomy shared by the whole workbench.

The CLI exit-code contract maps onto these: usage/validation problems exit
1, failed certification assertions exit 2, capacity and solver trouble
exit 3.
"""


class CdqsLabError(Exception):
    """Base class for all workbench errors."""

    exit_code = 1


class ArgumentError(CdqsLabError):
    """Bad argument or malformed input data."""

    exit_code = 1


class ValidationError(CdqsLabError):
    """A loaded object violates one of its type invariants."""

    exit_code = 1


class CapacityError(CdqsLabError):
    """A dimension or enumeration budget was exceeded."""

    exit_code = 3


class SolverError(CdqsLabError):
    """The SDP solver failed to produce a usable certificate."""

    exit_code = 3


class AssertionFailure(CdqsLabError):
    """A certified bound violated an asserted inequality."""

    exit_code = 2


class GapViolation(AssertionFailure):
    """A reduction's distance landed inside the forbidden gap."""

    exit_code = 2
