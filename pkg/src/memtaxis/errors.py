"""Exception types raised by the analysis and simulation layers."""


class MemtaxisError(Exception):
    """Base class for all package-specific errors."""


class NonFiniteDerivative(MemtaxisError):
    """A finite-difference stencil evaluation returned NaN or infinity."""


class NotOneRootCase(MemtaxisError):
    """The frequency quartic has no unique positive root (Q_n >= 0)."""


class ArccosDomain(MemtaxisError):
    """The arccos argument of the critical-delay formula is out of range."""


class SinSignViolation(MemtaxisError):
    """The sine of the crossing angle is not positive as the theory requires."""


class ZeroDenominator(MemtaxisError):
    """The delay-coupling denominator of the transversality formula vanishes."""


class C0Violation(MemtaxisError):
    """The kinetic self-damping condition a11 < 0 fails; the stability
    analysis premises do not apply."""


class SingularEigenvector(MemtaxisError):
    """An eigenvector denominator is numerically zero."""


class SingularResolvent(MemtaxisError):
    """A 2x2 resolvent matrix of the center-manifold solve is singular,
    signalling a resonance the construction excludes."""

    def __init__(self, which: str, det: complex):
        self.which = which
        self.det = det
        super().__init__(f"singular resolvent {which} (det={det:.3e})")


class PositivityLoss(MemtaxisError):
    """The prey field dropped to the positivity floor during integration."""

    def __init__(self, time: float, cell: int, value: float):
        self.time = time
        self.cell = cell
        self.value = value
        super().__init__(
            f"prey density lost positivity at t={time:.6g}, cell {cell} (u={value:.3e})"
        )


class NonFiniteState(MemtaxisError):
    """A simulated field left the finite range (blow-up)."""

    def __init__(self, time: float, cell: int):
        self.time = time
        self.cell = cell
        super().__init__(f"non-finite field value at t={time:.6g}, cell {cell}")


class InsufficientData(MemtaxisError):
    """Too few oscillation peaks to form a verdict and no steady convergence."""


class ConfigError(MemtaxisError):
    """A run-configuration file failed to parse or validate."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
