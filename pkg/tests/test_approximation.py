"""Thresholding, error curves, rate fits, and the wavelet baseline."""

import math

import numpy as np
import pytest

from shearsparse.approximation import (
    ErrorCurve,
    RateReport,
    coefficient_tail_curve,
    dwt2_forward,
    dwt2_inverse,
    fit_rate,
    nterm_error_curve,
    threshold_topN,
    wavelet_baseline,
    _pyramid_flatten,
)
from shearsparse.cartoon import CartoonImage, standard_scene, rasterize
from shearsparse.errors import DegenerateFit, MaxIterExceeded
from shearsparse.generators import daubechies_filter
from shearsparse.transform import analyze

_NS_GEOM = [2**k for k in range(5, 17)]


class TestErrorCurve:
    def test_monotone_invariant_enforced(self):
        with pytest.raises(ValueError, match="non-increasing"):
            ErrorCurve(points=((1, 1.0), (2, 2.0)))

    def test_n_strictly_increasing(self):
        with pytest.raises(ValueError, match="increasing"):
            ErrorCurve(points=((4, 1.0), (4, 0.5)))

    def test_negative_error_rejected(self):
        with pytest.raises(ValueError):
            ErrorCurve(points=((1, 1.0), (2, -0.1)))

    def test_floor_wobble_tolerated(self):
        # tiny increases far below the curve maximum are solver noise
        ErrorCurve(points=((1, 1.0), (2, 1e-12), (4, 2e-12)))

    def test_accessors(self):
        c = ErrorCurve(points=((1, 4.0), (2, 1.0)))
        assert np.array_equal(c.n_values, [1, 2])
        assert np.array_equal(c.errors, [4.0, 1.0])


class TestThresholdTopN:
    def test_keeps_largest_magnitudes(self, disk_coeffs_64):
        N = 50
        out = threshold_topN(disk_coeffs_64, N)
        kept = out.flatten()
        orig = disk_coeffs_64.flatten()
        nz = np.nonzero(kept)[0]
        assert nz.size == N
        assert np.array_equal(kept[nz], orig[nz])
        dropped_max = np.max(np.abs(np.where(kept != 0, 0.0, orig)))
        kept_min = np.min(np.abs(kept[nz]))
        assert kept_min >= dropped_max

    def test_trivial_sizes(self, disk_coeffs_64):
        total = disk_coeffs_64.total_count
        zero = threshold_topN(disk_coeffs_64, 0)
        assert np.all(zero.flatten() == 0.0)
        full = threshold_topN(disk_coeffs_64, total)
        assert np.array_equal(full.flatten(), disk_coeffs_64.flatten())
        with pytest.raises(ValueError):
            threshold_topN(disk_coeffs_64, total + 1)
        with pytest.raises(ValueError):
            threshold_topN(disk_coeffs_64, -1)

    def test_magnitude_order_example(self, disk_coeffs_64):
        # plant {3, -5, 2} at the head of the flattened layout
        cs = disk_coeffs_64.scaled(0.0)
        first = cs.canonical_slabs()[0]
        first.data[0, 0] = 3.0
        first.data[0, 1] = -5.0
        first.data[0, 2] = 2.0
        out = threshold_topN(cs, 2).flatten()
        assert out[0] == 3.0 and out[1] == -5.0 and out[2] == 0.0

    def test_tie_break_is_canonical_order(self, disk_coeffs_64):
        cs = disk_coeffs_64.scaled(0.0)
        first = cs.canonical_slabs()[0]
        first.data[0, 0] = 1.0
        first.data[0, 1] = -1.0
        first.data[0, 2] = 1.0
        out = threshold_topN(cs, 2).flatten()
        # earliest canonical positions win the tie
        assert out[0] == 1.0 and out[1] == -1.0 and out[2] == 0.0

    def test_determinism(self, disk_coeffs_64):
        a = threshold_topN(disk_coeffs_64, 137).flatten()
        b = threshold_topN(disk_coeffs_64, 137).flatten()
        assert np.array_equal(a, b)


class TestFitRate:
    def test_pure_power_exact(self):
        curve = ErrorCurve(points=tuple((N, N**-2.0) for N in _NS_GEOM))
        rep = fit_rate(curve, "pure-power")
        assert abs(rep.beta - 2.0) <= 1e-9
        assert rep.residual <= 1e-12
        assert rep.model == "pure-power" and rep.log_exponent == 0.0

    def test_inverse_linear_exact(self):
        curve = ErrorCurve(points=tuple((N, 1.0 / N) for N in _NS_GEOM))
        assert abs(fit_rate(curve, "pure-power").beta - 1.0) <= 1e-9

    def test_log_corrected_curve(self):
        pts = tuple((N, N**-2.0 * math.log(N) ** 3) for N in _NS_GEOM)
        curve = ErrorCurve(points=pts)
        pure = fit_rate(curve, "pure-power", fit_range=(64, 65536))
        # the log factor flattens the apparent exponent; recorded value
        assert 1.4 <= pure.beta <= 2.0
        assert pure.beta == pytest.approx(1.5849, abs=1e-3)
        fixed = fit_rate(
            curve, "power-with-log", fixed_log_exponent=3.0, fit_range=(64, 65536)
        )
        assert abs(fixed.beta - 2.0) <= 1e-6
        assert fixed.log_exponent == 3.0
        free = fit_rate(curve, "power-with-log", fit_range=(64, 65536))
        assert abs(free.beta - 2.0) <= 1e-6
        assert abs(free.log_exponent - 3.0) <= 1e-6

    def test_default_range_trims_ends(self):
        curve = ErrorCurve(points=tuple((N, N**-2.0) for N in _NS_GEOM))
        rep = fit_rate(curve, "pure-power")
        assert rep.fit_range[0] == _NS_GEOM[1]
        assert rep.fit_range[1] < _NS_GEOM[-1]

    def test_degenerate_cases(self):
        flat = ErrorCurve(points=tuple((N, 1.0) for N in _NS_GEOM))
        with pytest.raises(DegenerateFit, match="equal"):
            fit_rate(flat, "pure-power")
        withzero = ErrorCurve(points=tuple((N, 0.0) for N in _NS_GEOM))
        with pytest.raises(DegenerateFit, match="positive"):
            fit_rate(withzero, "pure-power")
        short = ErrorCurve(points=((2, 4.0), (4, 1.0), (8, 0.25), (16, 0.1)))
        with pytest.raises(DegenerateFit, match="5 points"):
            fit_rate(short, "pure-power")

    def test_unknown_model(self):
        curve = ErrorCurve(points=tuple((N, N**-2.0) for N in _NS_GEOM))
        with pytest.raises(ValueError, match="model"):
            fit_rate(curve, "exponential")

    def test_report_validation(self):
        with pytest.raises(ValueError):
            RateReport(model="pure-power", beta=1.0, log_exponent=0.0,
                       residual=-1.0, fit_range=(2, 4))


class TestTailSurrogate:
    def test_tail_values(self, disk_coeffs_64):
        mags = np.sort(np.abs(disk_coeffs_64.flatten()))[::-1]
        A = 0.5
        curve = coefficient_tail_curve(disk_coeffs_64, [0, 10, mags.size], A)
        assert curve.points[0][1] == pytest.approx(float(np.sum(mags**2)) / A, rel=1e-12)
        assert curve.points[1][1] == pytest.approx(float(np.sum(mags[10:] ** 2)) / A, rel=1e-12)
        assert curve.points[2][1] == 0.0

    def test_dominates_reconstruction_error(self, sys32_j4):
        # the frame inequality: ||f - f_N||^2 <= (1/A) * coefficient tail
        disk = standard_scene("disk")
        grid = rasterize(disk, 32, oversample=4)
        coeffs = analyze(grid, sys32_j4)
        Ns = [256, 1024, 4096]
        rec_curve = nterm_error_curve(disk, sys32_j4, 32, Ns, tol=1e-8, oversample=4)
        tail = coefficient_tail_curve(coeffs, Ns, frame_lower=1.3127592334e-4)
        for (N, err), (_, bound) in zip(rec_curve.points, tail.points):
            assert err <= bound


class TestNTermCurve:
    def test_zero_image(self, sys32_j4):
        blank = CartoonImage(region=standard_scene("disk").region, f0=None, f1=None)
        curve = nterm_error_curve(blank, sys32_j4, 32, [4, 16], tol=1e-8, oversample=2)
        assert all(e == 0.0 for _, e in curve.points)

    def test_full_selection_hits_tolerance_floor(self, sys32_j4):
        disk = standard_scene("disk")
        grid = rasterize(disk, 32, oversample=4)
        total = analyze(grid, sys32_j4).total_count
        tol = 1e-8
        curve = nterm_error_curve(
            disk, sys32_j4, 32, [64, total], tol=tol, oversample=4
        )
        fnorm2 = float(np.sum(grid**2)) / 32**2
        assert curve.points[-1][1] <= (10 * tol) ** 2 * fnorm2
        assert curve.points[0][1] > curve.points[-1][1]

    def test_unsorted_rejected(self, sys32_j4):
        disk = standard_scene("disk")
        with pytest.raises(ValueError, match="ascending"):
            nterm_error_curve(disk, sys32_j4, 32, [64, 16], tol=1e-6)

    def test_iteration_cap_names_offending_n(self, sys32_j4):
        disk = standard_scene("disk")
        with pytest.raises(MaxIterExceeded, match="N = 16") as exc_info:
            nterm_error_curve(disk, sys32_j4, 32, [16], tol=1e-12,
                              oversample=2, max_iter=2)
        assert exc_info.value.n_terms == 16


class TestWaveletBaseline:
    def test_parseval_and_perfect_reconstruction(self):
        rng = np.random.default_rng(0)
        g = rng.standard_normal((64, 64))
        h = daubechies_filter(6)
        pyr = dwt2_forward(g, h, 2)
        flat = _pyramid_flatten(pyr)
        assert abs(np.sum(flat**2) - np.sum(g**2)) <= 1e-10 * np.sum(g**2)
        assert np.max(np.abs(dwt2_inverse(pyr, h) - g)) <= 1e-12

    def test_zero_image(self):
        blank = CartoonImage(region=standard_scene("disk").region, f0=None, f1=None)
        curve = wavelet_baseline(blank, 32, [16, 64], oversample=2)
        assert all(e == 0.0 for _, e in curve.points)

    def test_full_selection_error_zero(self):
        disk = standard_scene("disk")
        curve = wavelet_baseline(disk, 32, [64, 32 * 32], oversample=2)
        grid = rasterize(disk, 32, oversample=2)
        fnorm2 = float(np.sum(grid**2)) / 32**2
        assert curve.points[-1][1] <= 1e-14 * fnorm2
        assert curve.points[0][1] > 0

    def test_matches_tail_identity(self):
        # orthonormality: the N-term error equals the dropped-coefficient
        # energy; cross-check reconstruction route against Parseval route
        disk = standard_scene("disk")
        n = 32
        grid = rasterize(disk, n, oversample=2)
        h = daubechies_filter(6)
        pyr = dwt2_forward(grid, h, 1)
        flat = np.sort(np.abs(_pyramid_flatten(pyr)))[::-1]
        N = 100
        tail = float(np.sum(flat[N:] ** 2)) / n**2
        curve = wavelet_baseline(disk, n, [N], oversample=2)
        assert curve.points[0][1] == pytest.approx(tail, rel=1e-10)
