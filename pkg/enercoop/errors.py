"""Exceptions raised by `enercoop`."""

import numpy as np


class EnercoopError(Exception):
    """Base class for every error raised by the package"""


class InvalidConfigurationError(EnercoopError, ValueError):
    """A configuration value (network, scenario, sweep or solver options) violates its invariants"""


class RelayNotBeneficialError(EnercoopError, ValueError):
    """The user-to-user channel is not better than the far user's direct channel, so relaying is disallowed"""


class DomainError(EnercoopError, ValueError):
    """A function was evaluated outside its domain"""


class InfeasibleAllocationError(EnercoopError, ValueError):
    """An allocation violates the time or energy constraints of its scenario"""


class InfeasibleProgramError(EnercoopError):
    """No strictly feasible starting point exists for a program"""


class GridTooLargeError(EnercoopError, ValueError):
    """The brute-force oracle was asked to scan more points than its guard allows"""


class SubproblemError(EnercoopError):
    """The interior-point solver for a quadratic subproblem stopped making progress"""


class NoFeasibleCandidateError(EnercoopError):
    """Every candidate of a strategy selection failed or was skipped"""


class OutputError(EnercoopError, OSError):
    """A result file could not be written"""


NUMERICAL_ERRORS: tuple[type[Exception], ...] = (ArithmeticError, ValueError, np.linalg.LinAlgError)
"""Errors raised by numpy and scipy on a numerical breakdown, caught with `EnercoopError` wherever one solve must not abort a batch"""
