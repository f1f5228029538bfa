"""Exception types shared across modules."""

from __future__ import annotations


class ValidationError(ValueError):
    """Invalid input: bad shapes, unnormalized axes, out-of-range parameters."""


class DimensionLimitError(ValidationError):
    """Requested Hilbert space exceeds the supported size (N > 6 nuclei)."""


class ResourceLimitError(RuntimeError):
    """Requested lattice or sweep would exceed the configured resource cap."""


class InsufficientSitesError(ValidationError):
    """Lattice sum asked to run on fewer sites than its convergence floor."""


class FitError(RuntimeError):
    """Nonlinear fit failed to converge; carries the last iterate."""

    def __init__(self, message, last_params=None, gradient_norm=None):
        super().__init__(message)
        self.last_params = last_params
        self.gradient_norm = gradient_norm


class FlatSignalError(FitError):
    """Fit input has no usable contrast (constant signal)."""


class AmbiguousTransitionError(ValidationError):
    """Pulse target pair is degenerate in energy and cannot be addressed."""
