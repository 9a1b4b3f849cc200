"""Transformer front end: parameter plumbing, shapes, reconstruction."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from shearsparse.estimator import ShearletTransform2D
from shearsparse.cartoon import rasterize, standard_scene
from shearsparse.transform import analyze, synthesize


@pytest.fixture(scope="module")
def disk_rows():
    grid = rasterize(standard_scene("disk"), 32, oversample=4)
    return np.stack([grid.ravel(), 0.5 * grid.ravel()])


@pytest.fixture(scope="module")
def fitted(disk_rows):
    # scales=4 keeps the finest scale near the grid Nyquist rate, where the
    # discrete system is a genuine frame and the dual solve converges
    est = ShearletTransform2D(scales=4, tol=1e-4, max_iter=2000)
    return est.fit(disk_rows)


class TestSklearnSurface:
    def test_get_set_params_clone(self):
        est = ShearletTransform2D(scales=4, sampling=0.5)
        params = est.get_params()
        assert params["scales"] == 4 and params["sampling"] == 0.5
        twin = clone(est)
        assert twin.get_params() == params
        est.set_params(scales=2)
        assert est.scales == 2

    def test_not_fitted(self, disk_rows):
        with pytest.raises(NotFittedError):
            ShearletTransform2D().transform(disk_rows)

    def test_fit_infers_grid(self, fitted):
        assert fitted.grid_size_ == 32
        assert fitted.n_features_in_ == 1024
        assert fitted.system_.J == 4
        assert fitted.n_output_features_ == fitted._template_.total_count


class TestTransform:
    def test_matches_analyze(self, fitted, disk_rows):
        out = fitted.transform(disk_rows)
        assert out.shape == (2, fitted.n_output_features_)
        direct = analyze(disk_rows[0].reshape(32, 32),
                         fitted.system_).flatten()
        assert np.array_equal(out[0], direct)
        # linearity carries through row-wise
        assert np.allclose(out[1], 0.5 * out[0], rtol=0, atol=1e-15)

    def test_rejects_non_square(self, fitted):
        with pytest.raises(ValueError, match="square"):
            fitted.transform(np.ones((1, 20)))

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError, match="power of two"):
            ShearletTransform2D().fit(np.ones((1, 81)))

    def test_rejects_feature_mismatch(self, fitted):
        with pytest.raises(ValueError, match="fitted with"):
            fitted.transform(np.ones((1, 4096)))


class TestInverse:
    def test_frame_image_matches_synthesize(self, fitted, disk_rows):
        coeff_rows = fitted.transform(disk_rows[:1])
        img = fitted.frame_image(coeff_rows)
        coeffs = analyze(disk_rows[0].reshape(32, 32), fitted.system_)
        direct = synthesize(coeffs, fitted.system_, 32)
        assert np.array_equal(img[0].reshape(32, 32), direct)

    def test_round_trip_within_solver_tolerance(self, fitted, disk_rows):
        coeff_rows = fitted.transform(disk_rows[:1])
        back = fitted.inverse_transform(coeff_rows)
        rel = (np.linalg.norm(back[0] - disk_rows[0])
               / np.linalg.norm(disk_rows[0]))
        assert rel <= 10 * fitted.tol

    def test_rejects_wrong_width(self, fitted):
        with pytest.raises(ValueError, match="coefficients per row"):
            fitted.inverse_transform(np.ones((1, 3)))
