"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration and input problems
exit with 2, numerical failures with 3.
"""


class CascadeToolError(Exception):
    """Base class for all package errors."""


class InputError(CascadeToolError, ValueError):
    """A caller violated an operation's precondition."""


class DomainError(CascadeToolError, ValueError):
    """A query point lies outside the domain of the requested evaluation."""


class ConfigError(CascadeToolError, ValueError):
    """Invalid run configuration; message carries the offending field path."""


class NumericalError(CascadeToolError, RuntimeError):
    """A numerical procedure broke down; carries diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class DegenerateDegreeError(InputError):
    """A normalized Laplacian was requested for a zero-degree vertex
    with the isolated-vertex policy disabled."""
