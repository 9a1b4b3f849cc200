"""Scikit-learn style front end for the shearlet analysis operator.

``ShearletTransform2D`` treats each sample as a flattened square grid and
maps it to its coefficient vector in the canonical slab order.  The fit
step tabulates generators and freezes the index layout for the inferred
grid size, so transformed rows are directly comparable across samples.

Only the transformer surface (``fit`` / ``transform`` / ``get_params``)
is adopted; the estimator rejects inputs that are not flattened square
power-of-two grids, so generic estimator checks that feed arbitrary
feature counts do not apply.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .generators import GeneratorSpec, build_generators
from .system import ShearletSystem
from .transform import analyze, dual_reconstruct, synthesize
from .validation import check_power_of_two

__all__ = ["ShearletTransform2D"]


class ShearletTransform2D(TransformerMixin, BaseEstimator):
    """Map flattened square grids to shearlet coefficient vectors.

    Parameters
    ----------
    scales : int
        Finest scale index; the system holds scales ``0 .. scales``.
    sampling : float
        Translation sampling constant (dyadic rationals keep the lattice
        aligned with the pixel grid).
    vanishing_moments : int
        Daubechies order used for both separable generator factors.
    cascade_depth : int
        Dyadic refinement depth of the generator tabulation.
    tol, max_iter : float, int
        Stopping contract for ``inverse_transform`` reconstruction.

    Attributes
    ----------
    generators_ : GeneratorSet
        Tabulated generator pair built during fit.
    system_ : ShearletSystem
        Frozen system (scales, shears, translation lattice).
    grid_size_ : int
        Pixel rows of the square grid inferred from the feature count.
    n_output_features_ : int
        Length of each transformed row.
    """

    def __init__(self, scales=3, sampling=1.0, vanishing_moments=6,
                 cascade_depth=12, tol=1e-6, max_iter=500):
        self.scales = scales
        self.sampling = sampling
        self.vanishing_moments = vanishing_moments
        self.cascade_depth = cascade_depth
        self.tol = tol
        self.max_iter = max_iter

    def _checked_rows(self, X, *, against_fit=False):
        X = check_array(X, dtype=np.float64, ensure_2d=True)
        n = math.isqrt(X.shape[1])
        if n * n != X.shape[1]:
            raise ValueError(
                f"each row must be a flattened square grid, got {X.shape[1]} "
                "features")
        check_power_of_two(n, "grid size")
        if against_fit and X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but {type(self).__name__} "
                f"was fitted with {self.n_features_in_}")
        return X, n

    def fit(self, X, y=None):
        X, n = self._checked_rows(X)
        spec = GeneratorSpec.daubechies(
            vanishing_moments=self.vanishing_moments,
            cascade_depth=self.cascade_depth)
        self.generators_ = build_generators(spec)
        self.system_ = ShearletSystem(
            generators=self.generators_, c=self.sampling, J=self.scales)
        self.grid_size_ = n
        self.n_features_in_ = X.shape[1]
        # layout template: slab shapes depend only on (system, n)
        self._template_ = analyze(np.zeros((n, n)), self.system_)
        self.n_output_features_ = self._template_.total_count
        return self

    def transform(self, X):
        check_is_fitted(self, "system_")
        X, n = self._checked_rows(X, against_fit=True)
        out = np.empty((X.shape[0], self.n_output_features_))
        for i, row in enumerate(X):
            out[i] = analyze(row.reshape(n, n), self.system_).flatten()
        return out

    def _coefficient_set(self, vector):
        coeffs = self._template_.copy()
        pos = 0
        for slab in coeffs.canonical_slabs():
            size = slab.data.size
            slab.data[...] = vector[pos:pos + size].reshape(slab.data.shape)
            pos += size
        return coeffs

    def inverse_transform(self, Xt):
        """Reconstruct grids from coefficient rows via the dual frame."""
        check_is_fitted(self, "system_")
        Xt = check_array(Xt, dtype=np.float64, ensure_2d=True)
        if Xt.shape[1] != self.n_output_features_:
            raise ValueError(
                f"expected {self.n_output_features_} coefficients per row, "
                f"got {Xt.shape[1]}")
        n = self.grid_size_
        out = np.empty((Xt.shape[0], n * n))
        for i, row in enumerate(Xt):
            rec = dual_reconstruct(self._coefficient_set(row), self.system_,
                                   n, tol=self.tol, max_iter=self.max_iter)
            out[i] = rec.grid.ravel()
        return out

    def frame_image(self, Xt):
        """Apply the synthesis operator to coefficient rows (no inversion)."""
        check_is_fitted(self, "system_")
        Xt = check_array(Xt, dtype=np.float64, ensure_2d=True)
        n = self.grid_size_
        out = np.empty((Xt.shape[0], n * n))
        for i, row in enumerate(Xt):
            out[i] = synthesize(self._coefficient_set(row), self.system_,
                                n).ravel()
        return out
