"""Exception types shared across the toolkit."""


class RydcavityError(Exception):
    """Base class for all toolkit errors."""


class InvalidInput(RydcavityError, ValueError):
    """An argument violates a documented precondition."""


class ConfigError(RydcavityError, ValueError):
    """A configuration file is missing keys or holds inconsistent values."""


class StepSizeTooLarge(RydcavityError, ValueError):
    """Integrator time step too coarse for the fastest frequency present."""


class StepTooLarge(RydcavityError, ValueError):
    """Total quantum-jump probability per step exceeds the first-order bound."""


class SingularElimination(RydcavityError, ZeroDivisionError):
    """Intermediate-state elimination undefined: zero detuning and zero linewidth."""


class CutoffTooSmall(RydcavityError, ValueError):
    """Photon-number cutoff truncates more probability mass than allowed."""


class ImpossibleJump(RydcavityError, RuntimeError):
    """A quantum jump was requested whose post-jump state has zero norm."""


class GeometryError(RydcavityError, ValueError):
    """Atom-array geometry is degenerate (e.g. zero qubit-atom distance)."""


class SingularResponse(RydcavityError, ZeroDivisionError):
    """Reflection-coefficient denominator vanished at the reported probe offset."""

    def __init__(self, message: str, delta: float):
        super().__init__(message)
        self.delta = delta


class TraceError(RydcavityError, RuntimeError):
    """Density-matrix trace drifted or positivity floor was violated."""


class DimensionExceeded(RydcavityError, ValueError):
    """Requested dense Hilbert space is larger than the hard validation cap."""
