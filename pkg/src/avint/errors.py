"""Exception types shared across the toolkit."""


class AvintError(Exception):
    """Base class for all library errors."""


class ParameterError(AvintError, ValueError):
    """An argument is outside the supported range."""


class SingularityError(AvintError):
    """A state sits on a singularity of the problem (e.g. zero separation)."""


class DegeneracyError(AvintError):
    """A prefactor or Gram matrix is (numerically) singular."""


class ConsistencyError(AvintError):
    """A structural property the construction relies on is violated."""


class GeometryError(AvintError):
    """A geometric constraint is violated (e.g. nonpositive cylinder volume)."""


class ConvergenceError(AvintError):
    """The nonlinear solver failed to converge.

    Carries the last residual norm in ``residual_norm``.
    """

    def __init__(self, message, residual_norm=None):
        super().__init__(message)
        self.residual_norm = residual_norm


class DivergenceError(AvintError):
    """The nonlinear solver produced non-finite values."""


class StepError(AvintError):
    """A single implicit step failed.

    ``step_index`` is attached by trajectory drivers when known.
    """

    def __init__(self, message, step_index=None):
        super().__init__(message)
        self.step_index = step_index


class NoSolitonError(AvintError):
    """No travelling-wave peak of sufficient amplitude was found."""
