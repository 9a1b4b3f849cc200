"""Edge probes, decay tables, smooth-part bounds, and significance counts."""

import math

import numpy as np
import pytest

from shearsparse.cartoon import (
    CartoonImage,
    SmoothPatch,
    make_radius_profile,
    rasterize,
    standard_scene,
)
from shearsparse.decay import (
    CountReport,
    EdgeProbe,
    _slab_boxes,
    edge_coefficient_decay,
    per_cube_count,
    significant_count,
    smooth_bessel_check,
    smooth_part_rate,
)
from shearsparse.errors import DegenerateFit, NoIntersectingShearlets
from shearsparse.system import ShearletIndex, ShearletSystem, _support_box
from shearsparse.transform import analyze


@pytest.fixture(scope="module")
def flat_region():
    # quartic harmonic tuned so the curvature vanishes at the four compass
    # points: rho''(0) = rho(0) exactly when a4 = -r0 / 17
    r0 = 0.3
    return make_radius_profile(r0, harmonics=((0, 0), (0, 0), (0, 0), (-r0 / 17, 0)))


@pytest.fixture(scope="module")
def flat_scene(flat_region):
    disk = standard_scene("disk")
    return CartoonImage(region=flat_region, f0=disk.f0, f1=disk.f1, name="flat4")


@pytest.fixture(scope="module")
def sys256(gens_short):
    return ShearletSystem(generators=gens_short, c=1.0, J=4)


@pytest.fixture(scope="module")
def flat_coeffs(flat_scene, sys256):
    return analyze(rasterize(flat_scene, 256, oversample=8), sys256)


@pytest.fixture(scope="module")
def sys_bessel(gens):
    return ShearletSystem(generators=gens, c=1.0, J=4)


class TestEdgeProbe:
    def test_point_interior_to_cube(self, flat_region):
        for j in (2, 3, 5):
            probe = EdgeProbe.at_angle(flat_region, 0.7, j)
            (a1, b1), (a2, b2) = probe.cube_at(j)
            x1, x2 = probe.point
            assert a1 < x1 < b1 and a2 < x2 < b2

    def test_cube_tracks_point_across_scales(self, flat_region):
        probe = EdgeProbe.at_angle(flat_region, 0.3, 5)
        x1, x2 = probe.point
        for j in range(7):
            (a1, b1), (a2, b2) = probe.cube_at(j)
            assert a1 < x1 < b1 and a2 < x2 < b2
            (w1, w2), (w3, w4) = probe.window_at(j)
            assert w1 <= a1 and w2 >= b1 and w3 <= a2 and w4 >= b2

    def test_rejects_far_cube(self, flat_region):
        with pytest.raises(ValueError, match="interior"):
            EdgeProbe(flat_region, 0.0, 4, (0, 0))

    def test_parameter_gates(self, flat_region):
        good = EdgeProbe.at_angle(flat_region, 0.0, 3)
        with pytest.raises(ValueError, match="padding"):
            EdgeProbe(flat_region, 0.0, 3, good.cube_p, padding=0.5)
        with pytest.raises(ValueError, match="finite"):
            EdgeProbe(flat_region, math.inf, 3, good.cube_p)
        with pytest.raises(ValueError, match="lattice"):
            EdgeProbe(flat_region, 0.0, 3, (1, 2, 3))

    def test_slope_conventions(self):
        disk = standard_scene("disk")
        assert EdgeProbe.at_angle(disk.region, 0.0, 4).slope == 0.0
        assert math.isinf(EdgeProbe.at_angle(disk.region, math.pi / 2, 4).slope)


class TestSlabBoxes:
    def test_matches_atom_support_boxes(self, sys256):
        for j, k in ((0, 0), (2, -2), (3, 3), (4, -4)):
            m1, m2, x1_lo, x1_hi, x2_lo, x2_hi = _slab_boxes(sys256, j, k)
            for i in range(0, m1.size, max(1, m1.size // 40)):
                idx = ShearletIndex("horizontal", j, k, int(m1[i]), int(m2[i]))
                (a1, b1), (a2, b2) = _support_box(sys256, idx)
                assert np.allclose([x1_lo[i], x1_hi[i], x2_lo[i], x2_hi[i]],
                                   [a1, b1, a2, b2], rtol=1e-15, atol=0)


class TestEdgeDecay:
    def test_regime_selection(self, flat_scene, flat_region, sys256, flat_coeffs):
        disk = standard_scene("disk")
        p0 = EdgeProbe.at_angle(flat_region, 0.0, 4)
        t0 = edge_coefficient_decay(flat_scene, sys256, 256, p0, range(5),
                                    coeffs=flat_coeffs)
        assert t0.regimes == (1,) and t0.slope == 0.0
        pv = EdgeProbe.at_angle(flat_region, math.pi / 2, 4)
        tv = edge_coefficient_decay(flat_scene, sys256, 256, pv, range(5),
                                    coeffs=flat_coeffs)
        assert tv.regimes == (2,)
        # tangent slope -2 sits in both regimes
        po = EdgeProbe.at_angle(disk.region, math.atan(2.0), 4)
        coeffs = analyze(rasterize(disk, 256, oversample=8), sys256)
        to = edge_coefficient_decay(disk, sys256, 256, po, range(2, 5),
                                    coeffs=coeffs)
        assert to.regimes == (1, 2)
        n1 = sum(1 for r in to.rows if r.regime == 1)
        n2 = sum(1 for r in to.rows if r.regime == 2)
        assert n1 == n2 > 0

    def test_frozen_per_scale_maxima(self, flat_scene, flat_region, sys256,
                                     flat_coeffs):
        probe = EdgeProbe.at_angle(flat_region, 0.0, 4)
        table = edge_coefficient_decay(flat_scene, sys256, 256, probe, range(5),
                                       coeffs=flat_coeffs)
        per = dict(table.per_scale_max(1))
        assert per[4] == pytest.approx(0.03444742039, rel=1e-8)
        assert per[1] == pytest.approx(0.01191121532, rel=1e-8)

    def test_row_arithmetic(self, flat_scene, flat_region, sys256, flat_coeffs):
        probe = EdgeProbe.at_angle(flat_region, 0.0, 4)
        table = edge_coefficient_decay(flat_scene, sys256, 256, probe, range(5),
                                       coeffs=flat_coeffs)
        for row in table.rows:
            assert row.n_hits > 0
            assert row.shear_offset == abs(row.k)
            want = row.max_coeff * row.shear_offset**3 * 2.0 ** (0.75 * row.j)
            assert row.ratio == pytest.approx(want, rel=1e-12)

    def test_padding_never_changes_membership(self, flat_scene, flat_region,
                                              sys256, flat_coeffs):
        base = EdgeProbe.at_angle(flat_region, 0.0, 4)
        wide = EdgeProbe(flat_region, 0.0, 4, base.cube_p, padding=6.0)
        ta = edge_coefficient_decay(flat_scene, sys256, 256, base, range(5),
                                    coeffs=flat_coeffs)
        tb = edge_coefficient_decay(flat_scene, sys256, 256, wide, range(5),
                                    coeffs=flat_coeffs)
        assert ta.rows == tb.rows

    def test_blank_image_all_zero(self, flat_region, sys256):
        blank = CartoonImage(region=flat_region, f0=None, f1=None)
        probe = EdgeProbe.at_angle(flat_region, 0.0, 3)
        table = edge_coefficient_decay(blank, sys256, 64, probe, range(4),
                                       oversample=2)
        assert all(r.max_coeff == 0.0 and r.ratio == 0.0 for r in table.rows)
        assert table.spread(1) == 0.0

    def test_range_gates(self, flat_scene, flat_region, sys256, flat_coeffs):
        probe = EdgeProbe.at_angle(flat_region, 0.0, 4)
        with pytest.raises(ValueError, match="empty"):
            edge_coefficient_decay(flat_scene, sys256, 256, probe, [],
                                   coeffs=flat_coeffs)
        with pytest.raises(ValueError, match="range"):
            edge_coefficient_decay(flat_scene, sys256, 256, probe, [7],
                                   coeffs=flat_coeffs)

    def test_missing_regime_raises(self, flat_scene, flat_region, sys256,
                                   flat_coeffs):
        probe = EdgeProbe.at_angle(flat_region, 0.0, 4)
        table = edge_coefficient_decay(flat_scene, sys256, 256, probe, range(5),
                                       coeffs=flat_coeffs)
        with pytest.raises(NoIntersectingShearlets):
            table.spread(2)


class TestBessel:
    def test_converging_ratio_sequence(self, sys_bessel):
        g = standard_scene("disk").f0
        ratios = smooth_bessel_check(g, sys_bessel, 128, 4)
        assert ratios.shape == (5,)
        assert np.all(np.diff(ratios) >= 0)
        assert ratios[-1] == pytest.approx(0.0112129, rel=1e-4)
        assert (ratios[-1] - ratios[-2]) / ratios[-2] <= 0.05

    def test_scalar_invariance(self, sys_bessel):
        g = standard_scene("disk").f0
        a = smooth_bessel_check(g, sys_bessel, 128, 4)
        b = smooth_bessel_check(g.scaled(3.0), sys_bessel, 128, 4)
        assert np.max(np.abs(a - b) / a) <= 1e-12

    def test_translation_stability(self, sys_bessel):
        ga = SmoothPatch(kind="gaussian-bump-sum", windowed=False,
                         bumps=((1.0, 0.45, 0.52, 0.07), (-0.6, 0.58, 0.43, 0.09)))
        gb = SmoothPatch(kind="gaussian-bump-sum", windowed=False,
                         bumps=((1.0, 0.48, 0.55, 0.07), (-0.6, 0.61, 0.46, 0.09)))
        ra = smooth_bessel_check(ga, sys_bessel, 128, 4)
        rb = smooth_bessel_check(gb, sys_bessel, 128, 4)
        assert abs(ra[-1] - rb[-1]) / ra[-1] <= 0.05

    def test_zero_patch(self, sys_bessel):
        g = standard_scene("disk").f0.scaled(0.0)
        assert np.all(smooth_bessel_check(g, sys_bessel, 64, 3, oversample=2) == 0)

    def test_flat_patch_with_boundary_energy_rejected(self, sys_bessel):
        # an unwindowed constant has zero second derivative but its cutoff at
        # the square's frame still produces coefficients
        g = SmoothPatch(kind="polynomial", monomials=((0, 0, 1.0),), windowed=False)
        with pytest.raises(ValueError, match="vanishes"):
            smooth_bessel_check(g, sys_bessel, 64, 3, oversample=2)

    def test_scale_cap(self, sys_bessel):
        g = standard_scene("disk").f0
        with pytest.raises(ValueError):
            smooth_bessel_check(g, sys_bessel, 64, 5, oversample=2)


class TestSmoothPartRate:
    def test_bump_rate(self, sys_bessel):
        rep = smooth_part_rate(standard_scene("disk").f0, sys_bessel, 128,
                               [2**e for e in range(4, 12)])
        assert rep.model == "pure-power"
        assert 1.9 <= rep.beta <= 1.97

    def test_zero_patch_degenerate(self, sys_bessel):
        g = standard_scene("disk").f0.scaled(0.0)
        with pytest.raises(DegenerateFit):
            smooth_part_rate(g, sys_bessel, 64, [2**e for e in range(4, 10)],
                             oversample=2)

    def test_negative_n_rejected(self, sys_bessel):
        with pytest.raises(ValueError, match=">= 0"):
            smooth_part_rate(standard_scene("disk").f0, sys_bessel, 64,
                             [-1, 2, 4, 8, 16], oversample=2)


@pytest.fixture(scope="module")
def disk_counts(gens):
    disk = standard_scene("disk")
    system = ShearletSystem(generators=gens, c=1.0, J=3)
    coeffs = analyze(rasterize(disk, 128, oversample=8), system)
    return disk, system, coeffs


class TestSignificantCount:
    def test_three_decades_exponent(self, disk_counts):
        disk, system, coeffs = disk_counts
        from shearsparse.decay import _rescaled_magnitudes
        mmax = float(_rescaled_magnitudes(coeffs).max())
        eps = np.logspace(math.log10(mmax / 3), math.log10(mmax / 3) - 3, 13)
        rep = significant_count(disk, system, 128, eps, coeffs=coeffs)
        assert all(c2 >= c1 for c1, c2 in zip(rep.counts, rep.counts[1:]))
        assert rep.exponent == pytest.approx(0.6377, abs=2e-3)
        assert 0.55 <= rep.exponent <= 0.85

    def test_threshold_above_max(self, disk_counts):
        disk, system, coeffs = disk_counts
        rep = significant_count(disk, system, 128, [20.0, 10.0], coeffs=coeffs)
        assert rep.counts == (0, 0)
        assert math.isnan(rep.exponent)

    def test_ordering_gates(self, disk_counts):
        disk, system, coeffs = disk_counts
        with pytest.raises(ValueError, match="descending"):
            significant_count(disk, system, 128, [1e-3, 1e-2], coeffs=coeffs)
        with pytest.raises(ValueError, match="positive"):
            significant_count(disk, system, 128, [1e-2, 0.0], coeffs=coeffs)

    def test_report_validation(self):
        with pytest.raises(ValueError, match="non-decreasing"):
            CountReport(epsilons=(0.1, 0.01), counts=(5, 3), exponent=0.0,
                        exponent_with_log=0.0, log_coefficient=0.0)
        with pytest.raises(ValueError, match="length"):
            CountReport(epsilons=(0.1,), counts=(5, 6), exponent=0.0,
                        exponent_with_log=0.0, log_coefficient=0.0)


class TestPerCubeCount:
    def test_frozen_counts(self, flat_scene, flat_region, sys256, flat_coeffs):
        probe = EdgeProbe.at_angle(flat_region, 0.0, 4)
        rep = per_cube_count(flat_scene, sys256, 256, probe, 1e-5,
                             coeffs=flat_coeffs)
        assert rep.intersecting_total == 384
        assert rep.significant_total == 60
        assert all(r.significant <= r.intersecting for r in rep.rows)
        ratios = [r.count_ratio for r in rep.rows if r.count_ratio > 0]
        assert max(ratios) / min(ratios) <= 8.0
        assert rep.case1_bound > 0 and rep.case2b_bound == 16.0
        assert rep.case1_ratio == rep.significant_total / rep.case1_bound

    def test_cube_cover_growth(self, flat_scene, flat_region, sys256,
                               flat_coeffs):
        probe = EdgeProbe.at_angle(flat_region, 0.0, 4)
        rep = per_cube_count(flat_scene, sys256, 256, probe, 1e-5,
                             coeffs=flat_coeffs)
        assert [c[:2] for c in rep.cube_counts] == [
            (0, 4), (1, 9), (2, 9), (3, 16), (4, 21)]
        for j, count, ratio in rep.cube_counts:
            assert ratio == count / 2.0 ** (j / 2.0)
            assert 3.0 <= ratio <= 8.0

    def test_threshold_above_max(self, flat_scene, flat_region, sys256,
                                 flat_coeffs):
        probe = EdgeProbe.at_angle(flat_region, 0.0, 4)
        rep = per_cube_count(flat_scene, sys256, 256, probe, 10.0,
                             coeffs=flat_coeffs)
        assert rep.significant_total == 0

    def test_gates(self, flat_scene, flat_region, sys256, flat_coeffs):
        probe = EdgeProbe.at_angle(flat_region, 0.0, 4)
        with pytest.raises(ValueError, match="positive"):
            per_cube_count(flat_scene, sys256, 256, probe, 0.0,
                           coeffs=flat_coeffs)
        deep = EdgeProbe.at_angle(flat_region, 0.0, 6)
        with pytest.raises(ValueError, match="exceeds"):
            per_cube_count(flat_scene, sys256, 256, deep, 1e-5,
                           coeffs=flat_coeffs)
