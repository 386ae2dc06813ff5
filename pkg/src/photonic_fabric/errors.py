"""Exception hierarchy shared by every fabric module."""

from __future__ import annotations


class FabricError(Exception):
    """Base class for all errors raised by photonic_fabric."""


class DimensionError(FabricError, ValueError):
    pass


class CoordinateError(FabricError, ValueError):
    pass


class NotFoundError(FabricError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "not found"


class InvalidStateError(FabricError, ValueError):
    pass


class UnreachablePathError(FabricError, ValueError):
    pass


class CalibrationError(FabricError):
    def __init__(self, message: str, best_residual_db: float):
        super().__init__(f"{message} (best residual {best_residual_db:.4g} dB)")
        self.best_residual_db = best_residual_db


class OutOfRangeError(FabricError, ValueError):
    pass


class BreakdownError(FabricError, ValueError):
    pass


class DegenerateRouteError(FabricError, ValueError):
    pass


class InfeasibleRouteError(FabricError):
    pass


class SizeGuardError(FabricError, ValueError):
    pass


class RouteValidationError(FabricError, ValueError):
    pass


class AllocationConflict(FabricError):
    """Raised when a route collides with already granted routes.

    ``clashes`` lists every contested resource, not only the first one.
    """

    def __init__(self, clashes):
        self.clashes = list(clashes)
        super().__init__(f"{len(self.clashes)} conflicting resource(s)")


class InvariantViolation(FabricError, AssertionError):
    pass


class ConfigError(FabricError, ValueError):
    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class ConfigSyntaxError(ConfigError):
    pass


class UnknownKeyError(ConfigError):
    pass


class ConfigValueError(ConfigError):
    pass
