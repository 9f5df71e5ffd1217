"""Exception types raised by pdbas."""


class PDBASError(Exception):
    """Base class for all pdbas errors."""


class InvalidKernelError(PDBASError, ValueError):
    """Kernel parameters or sample tables are inconsistent."""


class UnderResolvedHorizonError(PDBASError, ValueError):
    """Grid spacing is too coarse to resolve the horizon."""


class LayoutError(PDBASError, ValueError):
    """Domain or grid construction received invalid geometry."""


class NormalizationError(PDBASError, RuntimeError):
    """Spectral convolution produced a non-negligible imaginary part."""


class MirrorOutOfRangeError(PDBASError, ValueError):
    """A mirror point for a fictitious node falls outside the domain."""


class ConfigError(PDBASError, ValueError):
    """Run configuration is malformed or inconsistent."""


class SweepError(PDBASError, RuntimeError):
    """A parameter sweep could not be completed."""


class DivergenceError(PDBASError, ArithmeticError):
    """Time stepping produced non-finite or runaway values.

    ``state`` holds the last finite state reached before the failed step.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state
