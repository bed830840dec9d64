"""Exception hierarchy shared by all modules."""


class CoagError(Exception):
    """Base class for all package errors."""


class ConfigError(CoagError, ValueError):
    """Invalid parameters or configuration (CLI exit code 2)."""


class DomainError(ConfigError):
    """Parameter outside the domain where a formula is defined."""


class DistributionalKernel(CoagError, TypeError):
    """Pointwise evaluation requested for a measure-valued kernel."""


class NumericalFailure(CoagError, ArithmeticError):
    """A computation failed at runtime (CLI exit code 3)."""


class PoleError(NumericalFailure):
    """Argument hits a pole of a gamma-type function."""


class QuadratureNotConverged(NumericalFailure):
    """Adaptive quadrature exhausted its evaluation budget."""


class NegativeValue(NumericalFailure):
    """Lattice integration produced a clearly negative density."""


class WindowTooSmall(NumericalFailure):
    """Lattice support reached the end of the computational window."""


class FrontNotFound(NumericalFailure):
    """No level crossing exists in the profile."""


class NoRootFound(NumericalFailure):
    """Every Newton seed diverged."""


class SeriesDiverged(NumericalFailure):
    """Series terms stopped decreasing before the requested order."""


class BlowUp(NumericalFailure):
    """Simulated field exceeded the blow-up threshold."""


class NegativityBreach(NumericalFailure):
    """Simulated field went below the negativity threshold."""
