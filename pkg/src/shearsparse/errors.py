"""Exception types raised across the package.

Every error that callers are expected to catch derives from
:class:`ShearsparseError` so that ``except ShearsparseError`` guards a whole
pipeline stage.
"""


class ShearsparseError(Exception):
    """Base class for all package-specific errors."""


class CurvatureExceeded(ShearsparseError):
    """Radius profile's second derivative exceeds the allowed bound."""


class OutOfUnitSquare(ShearsparseError):
    """Geometry leaves the unit square (or violates the radius cap)."""


class DegenerateTangent(ShearsparseError):
    """Boundary tangent vector vanishes at the requested angle."""


class InsufficientMoments(ShearsparseError):
    """Wavelet filter has fewer than two vanishing moments."""


class ConditionViolated(ShearsparseError):
    """Generator fails a frequency-decay envelope check."""


class ResolutionTooCoarse(ShearsparseError):
    """Pixel grid cannot resolve the finest translation lattice."""


class NotAFrame(ShearsparseError):
    """Estimated lower frame bound is numerically zero.

    ``upper``/``residual_upper`` carry the certified largest eigenvalue when
    the upper-bound stage finished before the failure was diagnosed, so
    callers can still cross-check that side against an independent route.
    """

    def __init__(self, message, upper=None, residual_upper=None):
        super().__init__(message)
        self.upper = upper
        self.residual_upper = residual_upper


class MaxIterExceeded(ShearsparseError):
    """Iterative solve hit its iteration cap before reaching tolerance."""

    def __init__(self, message, best=None, n_terms=None):
        super().__init__(message)
        self.best = best
        self.n_terms = n_terms


class DegenerateFit(ShearsparseError):
    """Rate fit is ill-posed (non-positive data or no spread in N)."""


class NoIntersectingShearlets(ShearsparseError):
    """No enumerated atom meets the probe cube and the edge."""


class ConfigInvalid(ShearsparseError):
    """Experiment configuration failed validation."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class ExperimentFailed(ShearsparseError):
    """An experiment stage raised; carries the failing stage name."""

    def __init__(self, stage, message):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


class ManifestCorrupt(ShearsparseError):
    """Manifest entry is malformed or a content hash does not match."""
