"""Exception types shared across the package."""


class PhotocorrError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(PhotocorrError):
    """Invalid input data or configuration."""


class CapacityError(PhotocorrError):
    """Requested register exceeds the exact-solver size limits."""

    def __init__(self, message, n=None, limit=None):
        super().__init__(message)
        self.n = n
        self.limit = limit


class SingularityError(PhotocorrError):
    """Green's tensor evaluated at (or too close to) coincident points."""


class IntegrationError(PhotocorrError):
    """Adaptive integrator failed; carries the failing time."""

    def __init__(self, message, t_fail=None):
        super().__init__(message)
        self.t_fail = t_fail


class DegenerateSteadyStateError(PhotocorrError):
    """Stationary solve failed its residual or uniqueness check.

    ``singular_values`` holds the two smallest singular values of the
    generator when they were computable.
    """

    def __init__(self, message, singular_values=None):
        super().__init__(message)
        self.singular_values = singular_values


class ZeroIntensityError(PhotocorrError):
    """Normalized correlation undefined: the intensity denominator vanishes."""


class SampleFailureError(PhotocorrError):
    """A Monte-Carlo sample failed; estimates abort rather than skip."""

    def __init__(self, message, sample_index=None, subset=None):
        super().__init__(message)
        self.sample_index = sample_index
        self.subset = tuple(subset) if subset is not None else None
