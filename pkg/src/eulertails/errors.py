"""Exception hierarchy.

Exit-code contract used by the CLI: domain and regime violations map to
exit code 1, accuracy and consistency failures to exit code 2.
"""

from __future__ import annotations


class EulertailsError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class DomainError(EulertailsError):
    """An argument lies outside the mathematical domain of an operation."""

    exit_code = 1


class RegimeError(EulertailsError):
    """Arguments are formally valid but outside the supported regime
    (e.g. y < 2 e^t, t > 12, or a lower-tail threshold above the mean)."""

    exit_code = 1


class AccuracyError(EulertailsError):
    """A computation cannot meet its accuracy target (e.g. a contour
    truncation bound exceeding the tolerated fraction of the value)."""

    exit_code = 2


class ConsistencyError(EulertailsError):
    """Two routes that must agree disagree beyond tolerance."""

    exit_code = 2
