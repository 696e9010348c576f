"""Exception types shared by the mkdvlab modules.

Input problems derive from :class:`InputError` (CLI exit code 1); failures of
a numerical method on valid input derive from :class:`NumericalError` (exit
code 2).
"""


class MkdvLabError(Exception):
    """Base class for all mkdvlab errors."""


class InputError(MkdvLabError, ValueError):
    """Invalid input data or configuration."""


class NumericalError(MkdvLabError, RuntimeError):
    """A numerical method failed on otherwise valid input."""


class UnderResolvedError(InputError):
    """The grid does not resolve the oscillation of the jump matrix."""

    def __init__(self, message, required_nodes):
        super().__init__(f"{message} (requires at least {required_nodes} nodes)")
        self.required_nodes = int(required_nodes)


class BlowUpError(NumericalError):
    """An ODE solution left the admissible bound."""

    def __init__(self, message, location):
        super().__init__(f"{message} at s = {location:.6g}")
        self.location = float(location)


class DegeneratePhaseError(NumericalError):
    """arg r(z0) is undefined because r(z0) = 0."""
