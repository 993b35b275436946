"""
Error types shared across the package
"""


class AfmflowError(Exception):
    """Base class for all package errors"""


class ConfigError(AfmflowError, ValueError):
    """Invalid run configuration or material coefficients"""

    def __init__(self, message: str, errors=None):
        super().__init__(message)
        self.errors = list(errors or [])

    @classmethod
    def from_errors(cls, what: str, errors) -> "ConfigError":
        errors = list(errors)
        return cls(f"{what}: " + "; ".join(errors), errors)


class MeshError(AfmflowError, ValueError):
    """Invalid mesh input, construction or file"""

    def __init__(self, message: str, line: int = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MeshMismatchError(AfmflowError, ValueError):
    """Fields or operators that live on different meshes"""


class NumericalError(AfmflowError, RuntimeError):
    """Solver failure or non-finite numbers during a run"""


class TrajectoryError(AfmflowError, ValueError):
    """Requested time outside a trajectory or between discarded snapshots"""
