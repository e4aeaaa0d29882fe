"""Exception hierarchy shared by all pwfn modules.

The CLI maps these onto process exit codes (see :mod:`pwfn.cli`), so solver
code should raise the most specific class that applies instead of bare
ValueError/RuntimeError.
"""


class PwfnError(Exception):
    """Base class for all errors raised by pwfn."""


class ConfigError(PwfnError):
    """A scenario configuration file is missing, unparseable or invalid."""


class DomainError(PwfnError):
    """An argument lies outside the mathematical domain of an operation."""


class InconsistencyError(PwfnError):
    """Input data violates a structural requirement (conjugacy, hermiticity)."""


class ShapeError(PwfnError):
    """Two objects that must share a grid do not."""


class NormalizationError(PwfnError):
    """A wave function that must be normalized is not."""

    def __init__(self, message, measured_norm=None):
        super().__init__(message)
        self.measured_norm = measured_norm


class StabilityError(PwfnError):
    """A time step violates the stability (CFL) bound of a stepper."""


class GaugeSingularityError(PwfnError):
    """A momentum-space quantity was requested inside the gauge pole cone."""


class WindowError(PwfnError):
    """A fiber frequency lies outside the transverse bound-state window."""


class ResourceError(PwfnError):
    """A brute-force cross-check was requested on a grid above its size cap."""


class TruncationError(PwfnError):
    """A grid box is too small to hold the requested field without truncation."""


class FormatError(PwfnError):
    """A data file has a bad magic number, version, or payload size."""
