"""shearsparse: cone-adapted compactly supported shearlet frames on images.

Builds separable compactly supported shearlet systems from validated 1-D
generators, runs the analysis/synthesis transforms, and measures sparse
approximation rates of cartoon-like images against a wavelet baseline.
"""

from .errors import (
    ConditionViolated,
    ConfigInvalid,
    CurvatureExceeded,
    DegenerateFit,
    DegenerateTangent,
    ExperimentFailed,
    InsufficientMoments,
    ManifestCorrupt,
    MaxIterExceeded,
    NoIntersectingShearlets,
    NotAFrame,
    OutOfUnitSquare,
    ResolutionTooCoarse,
    ShearsparseError,
)

__version__ = "0.1.0"
