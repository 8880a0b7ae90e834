"""Exception types shared across the kit."""


class KitError(Exception):
    """Base class for all kit-specific errors."""


class ParameterError(KitError, ValueError):
    """A caller-supplied parameter, file, or configuration value is invalid."""


class SimulationError(KitError):
    """A fault list cannot be simulated as given (e.g. conflicting fault semantics)."""


class ColoringError(SimulationError):
    """No proper 4-codeword assignment was found for the adjacency graph."""


class FitError(KitError):
    """Curve fitting failed: too few samples or a degenerate (singular) system."""


class InversionError(KitError):
    """A severity curve cannot be inverted at the requested value."""
