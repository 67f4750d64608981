"""Exception hierarchy shared by the solver, the interferometer and the CLI."""


class SCCError(Exception):
    """Base class for all package errors."""


class ModelError(SCCError, ValueError):
    """Invalid model parameters or unsupported sector."""


class PoleError(SCCError, ArithmeticError):
    """A rapidity sits on a pole of the Richardson equations."""


class ConvergenceError(SCCError):
    """Continuation or Newton correction failed for one eigenstate.

    Carries the state label, the last residual norm and the coupling at
    which the continuation stopped.
    """

    def __init__(self, message, *, state=None, residual=None, coupling=None):
        super().__init__(message)
        self.state = state
        self.residual = residual
        self.coupling = coupling


class BasisQualityError(SCCError):
    """A Bethe eigenvector disagrees with the diagonalisation oracle."""


class NoDominantPeakError(SCCError):
    """The fringe signal has no single dominant frequency."""


class CalibrationError(SCCError, ValueError):
    """Samples are too short or too coarse to calibrate a fringe frequency."""


class DivergenceError(SCCError, ZeroDivisionError):
    """A sensitivity formula hits a vanishing denominator."""


class NormalizationError(SCCError, ValueError):
    """A probability distribution is not normalised."""


class ConfigError(SCCError, ValueError):
    """Malformed experiment configuration."""
