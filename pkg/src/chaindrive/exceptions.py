"""
Custom exceptions for chaindrive

This module defines the exception classes raised by the simulation library
and the scenario runner, each carrying the context needed to report the
failure precisely.
"""


class ChainDriveError(Exception):
    """Base exception class for all chaindrive errors."""
    pass


class InvalidSite(ChainDriveError):
    """Exception raised when a site index is out of range or repeated."""

    def __init__(self, message, site=None, n_sites=None):
        self.site = site
        self.n_sites = n_sites
        super().__init__(message)


class ShapeError(ChainDriveError):
    """Exception raised when operator or state dimensions do not match."""

    def __init__(self, message, expected=None, actual=None):
        self.expected = expected
        self.actual = actual
        super().__init__(message)


class ModelError(ChainDriveError):
    """Exception raised when a chain model's coupling arrays do not fit its family."""

    def __init__(self, message, family=None):
        self.family = family
        super().__init__(message)


class UnsupportedTransform(ChainDriveError):
    """Exception raised when no effective Hamiltonian exists for a (family, drive axis) pair."""

    def __init__(self, message, family=None, axis=None):
        self.family = family
        self.axis = axis
        super().__init__(message)


class CalibrationError(ChainDriveError):
    """Exception raised when a Bessel weight cannot be reached by any drive amplitude."""

    def __init__(self, message, target=None):
        self.target = target
        super().__init__(message)


class NumericalError(ChainDriveError):
    """Exception raised when an operator or state violates a numerical invariant."""

    def __init__(self, message, quantity=None):
        self.quantity = quantity
        super().__init__(message)


class NotExcitationConserving(ChainDriveError):
    """Exception raised when a Hamiltonian does not commute with the total z magnetization."""

    def __init__(self, message, commutator_norm=None):
        self.commutator_norm = commutator_norm
        super().__init__(message)


class ParseError(ChainDriveError):
    """Exception raised when a scenario file cannot be parsed or validated."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field '{field}'")
        if location:
            message = f"{', '.join(location)}: {message}"
        super().__init__(message)


class RunError(ChainDriveError):
    """Exception raised when one comparison run of a scenario fails."""

    def __init__(self, message, run_label=None):
        self.run_label = run_label
        super().__init__(message)


class OutputError(ChainDriveError):
    """Exception raised when results cannot be emitted."""
    pass


class ConvergenceWarning(UserWarning):
    """Warning issued when doubling the substep count changes the final state noticeably."""
    pass
