"""
Exception hierarchy for the zerod_rom package
"""
from typing import Any, List, Optional


class ZeroDError(Exception):
    """Base class for all errors raised by zerod_rom"""


class CountMismatch(ZeroDError):
    """The network declares a different number of unknowns than equations"""

    def __init__(self, total_dofs: int, total_equations: int):
        self.total_dofs = total_dofs
        self.total_equations = total_equations
        super().__init__(
            f"Network has {total_dofs} degrees of freedom but {total_equations} equations"
        )


class NetworkValidationError(ZeroDError):
    """Raised when a network fails structural validation"""

    def __init__(self, diagnostics: List[Any]):
        self.diagnostics = list(diagnostics)
        lines = "; ".join(str(d) for d in self.diagnostics)
        super().__init__(f"Invalid network: {lines}")


class UnknownKind(ZeroDError):
    """Element kind has no local equations"""


class DimensionMismatch(ZeroDError):
    """Local solution vectors do not match the element's dof count"""


class NonPositiveArea(ZeroDError):
    """Cross-sectional area must be strictly positive"""


class NonPositiveGeometry(ZeroDError):
    """Segment length or radius must be strictly positive"""


class SolverError(ZeroDError):
    """Base for errors raised while time stepping; carries the failing step"""

    step: Optional[int] = None
    time: Optional[float] = None

    def with_context(self, step: int, time: float) -> "SolverError":
        self.step = step
        self.time = time
        return self


class NewtonDivergence(SolverError):
    """Newton iterations did not reach the requested tolerance"""

    def __init__(self, iteration: int, residual_norm: float):
        self.iteration = iteration
        self.residual_norm = residual_norm
        super().__init__(
            f"Newton iteration did not converge after {iteration} iterations "
            f"(residual norm {residual_norm:.3e})"
        )


class SingularTangent(SolverError):
    """The sparse LU factorization found the tangent matrix singular"""


class InsufficientCycles(ZeroDError):
    """At least two stored cardiac cycles are needed"""


class TooFewSamples(ZeroDError):
    """Branch profile has too few samples for the requested segmentation"""


class MissingBC(ZeroDError):
    """A cap of the centerline tree has no boundary condition assigned"""

    def __init__(self, outlet: Any):
        self.outlet = outlet
        super().__init__(f"No boundary condition assigned to cap '{outlet}'")


class MismatchedCaps(ZeroDError):
    """Reference and test cap series cannot be compared"""


class ZeroFlowAmplitude(ZeroDError):
    """Reference flow at a non-inlet cap is constant, the flow error is undefined"""

    def __init__(self, cap: Any):
        self.cap = cap
        super().__init__(f"Reference flow amplitude is zero at cap '{cap}'")


class OutOfRange(ZeroDError):
    """Query position lies outside the interpolation range"""


class ModelFormatError(ZeroDError):
    """An input file could not be parsed"""

    def __init__(self, path: Any, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class ConfigError(ZeroDError):
    """Run or sweep configuration is inconsistent"""


class InvalidTree(ZeroDError):
    """Centerline tree branches do not form a connected tree rooted at the inlet"""
