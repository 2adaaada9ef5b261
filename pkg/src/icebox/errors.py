"""Exception taxonomy shared across the package.

The CLI maps these onto process exit codes: usage/domain problems exit 1,
resource-guard rejections exit 2, solver failures exit 3.
"""


class IceboxError(Exception):
    """Base class for all package-specific errors."""


class DomainError(IceboxError, ValueError):
    """An argument violates a documented precondition."""


class UnsupportedInputError(DomainError):
    """Input is well-formed but outside what this routine handles."""


class UsageError(IceboxError):
    """Malformed configuration or command line."""


class CapacityError(IceboxError):
    """A resource guard refused the requested problem size."""


class NumericalError(IceboxError, RuntimeError):
    """An iterative solver failed to converge; carries diagnostics."""

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = dict(diagnostics)

    def __str__(self) -> str:
        base = super().__str__()
        if self.diagnostics:
            details = ", ".join(f"{k}={v}" for k, v in self.diagnostics.items())
            return f"{base} ({details})"
        return base
