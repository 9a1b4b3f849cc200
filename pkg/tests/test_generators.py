"""Generator construction, tabulation calculus, and decay verification.

Filter coefficients are checked against independently published values;
tabulation integrals against hand-computed piecewise-constant calculus.
"""

import math

import numpy as np
import pytest

from shearsparse.errors import ConditionViolated, InsufficientMoments
from shearsparse.generators import (
    GeneratorSpec,
    Tabulation1D,
    build_generators,
    cascade_tabulate,
    daubechies_filter,
    filter_alternating_moment,
    meyer_spectral_pair,
    verify_decay_conditions,
    wavelet_taps,
)

# classical 4-tap orthonormal filter, closed form
_REF_TAPS_P2 = np.array(
    [1 + math.sqrt(3), 3 + math.sqrt(3), 3 - math.sqrt(3), 1 - math.sqrt(3)]
) / (4 * math.sqrt(2))

# standard published 8-tap values (truncated to the usual 17 digits)
_REF_TAPS_P4 = np.array(
    [
        0.23037781330885523,
        0.7148465705525415,
        0.6308807679295904,
        -0.02798376941698385,
        -0.18703481171888114,
        0.030841381835986965,
        0.032883011666982945,
        -0.010597401784997278,
    ]
)


class TestDaubechiesFilter:
    def test_published_taps_p2(self):
        assert np.max(np.abs(daubechies_filter(2) - _REF_TAPS_P2)) < 1e-14

    def test_published_taps_p4(self):
        assert np.max(np.abs(daubechies_filter(4) - _REF_TAPS_P4)) < 1e-11

    @pytest.mark.parametrize("p", range(1, 13))
    def test_lowpass_normalization(self, p):
        h = daubechies_filter(p)
        assert h.shape == (2 * p,)
        assert abs(h.sum() - math.sqrt(2)) < 1e-9

    @pytest.mark.parametrize("p", range(1, 13))
    def test_orthonormal_shifts(self, p):
        h = daubechies_filter(p)
        for s in range(p):
            ip = float(np.dot(h, np.roll(h, 2 * s))) if s else float(np.dot(h, h))
            assert abs(ip - (1.0 if s == 0 else 0.0)) < 1e-9

    @pytest.mark.parametrize("p", [2, 4, 6])
    def test_highpass_vanishing_moments(self, p):
        g = wavelet_taps(daubechies_filter(p))
        for ell in range(p):
            assert abs(filter_alternating_moment(daubechies_filter(p), ell)) < 1e-9 * (
                len(g) ** ell
            )

    def test_order_bounds(self):
        with pytest.raises(ValueError):
            daubechies_filter(0)
        with pytest.raises(ValueError):
            daubechies_filter(13)


class TestTabulation1D:
    @pytest.fixture()
    def tab(self):
        # three cells of width 0.5 on [1.0, 2.5]: values 2, -1, 0.5
        return Tabulation1D(np.array([2.0, -1.0, 0.5]), 1.0, 0.5)

    def test_lookup_and_support(self, tab):
        assert tab.support == (1.0, 2.5)
        vals = tab([0.9, 1.1, 1.6, 2.2, 2.6])
        assert np.array_equal(vals, [0.0, 2.0, -1.0, 0.5, 0.0])

    def test_antiderivative_exact(self, tab):
        # full integral = 0.5 * (2 - 1 + 0.5)
        assert tab.antiderivative(3.0) == pytest.approx(0.75, abs=1e-15)
        # inside cell 1: 0.5*2 + 0.1*(-1)
        assert tab.antiderivative(1.6) == pytest.approx(0.9, abs=1e-14)
        assert tab.antiderivative(0.0) == 0.0

    def test_moments_exact(self, tab):
        assert tab.moment(0) == pytest.approx(0.75, abs=1e-15)
        m1 = 2.0 * (1.5**2 - 1.0**2) / 2 - (2.0**2 - 1.5**2) / 2 + 0.5 * (2.5**2 - 2.0**2) / 2
        assert tab.moment(1) == pytest.approx(m1, abs=1e-14)

    def test_norms_exact(self, tab):
        assert tab.norm_l2() == pytest.approx(math.sqrt(0.5 * 5.25), rel=1e-15)
        assert tab.norm_l1() == pytest.approx(1.75, rel=1e-15)

    def test_spectrum_at_zero_is_mass(self, tab):
        assert abs(complex(tab.spectrum(0.0)[0]) - 0.75) < 1e-15

    def test_spectrum_matches_quadrature(self, tab):
        # piecewise-constant Fourier integral has a closed form; cross-check
        # one frequency against dense midpoint quadrature
        xi = 1.7
        xs = np.linspace(1.0, 2.5, 60001)
        mid = 0.5 * (xs[1:] + xs[:-1])
        quad = np.sum(tab(mid) * np.exp(-2j * np.pi * xi * mid)) * (xs[1] - xs[0])
        assert abs(complex(tab.spectrum(xi)[0]) - quad) < 1e-8


class TestCascade:
    def test_depth_refinement_consistency(self):
        h = daubechies_filter(6)
        v8 = cascade_tabulate(h, 8)
        v12 = cascade_tabulate(h, 12)
        assert v12.size == (v8.size - 1) * 16 + 1
        assert np.max(np.abs(v8 - v12[::16])) < 1e-9

    def test_partition_of_unity(self):
        # integer translates of the scaling function sum to 1 everywhere
        h = daubechies_filter(4)
        depth = 10
        vals = cascade_tabulate(h, depth)
        width = len(h) - 1
        tab = Tabulation1D(vals[:-1], 0.0, 2.0**-depth)
        x = np.linspace(0.0, 1.0, 257)[:-1]
        total = sum(tab(x + t) for t in range(width + 1))
        assert np.max(np.abs(total - 1.0)) < 1e-8


class TestGeneratorSpec:
    def test_daubechies_defaults(self):
        spec = GeneratorSpec.daubechies()
        assert spec.support_width == 11
        assert spec.alpha == 5.5 and spec.gamma == 4.0

    @pytest.mark.parametrize(
        "kwargs",
        [{"alpha": 5.0}, {"gamma": 3.9}, {"cascade_depth": 3}, {"cascade_depth": 17}],
    )
    def test_invalid_parameters(self, kwargs):
        with pytest.raises(ValueError):
            GeneratorSpec.daubechies(**kwargs)


class TestBuildGenerators:
    def test_haar_rejected(self):
        with pytest.raises(InsufficientMoments):
            build_generators(GeneratorSpec.daubechies(vanishing_moments=1))

    def test_two_moments_accepted(self, gens_short):
        assert gens_short.support_width == 3

    def test_moment_residuals(self, gens):
        res = gens.moment_residuals()
        assert set(res) == {0, 1}
        assert res[0] <= 1e-8 and res[1] <= 1e-8

    def test_sheared_moments_vanish(self, gens):
        for ell in (0, 1):
            for k in (-2, 0, 3):
                assert abs(gens.sheared_x1_moment(ell, k, 0.37)) <= 1e-8

    def test_unit_norms(self, gens):
        assert abs(gens.psi_norm_l2() - 1.0) < 1e-5
        assert abs(gens.phi_norm_l2() - 1.0) < 1e-5
        assert gens.psi_norm_l1() == pytest.approx(2.5355640868578067, rel=1e-9)

    def test_psi1_support(self, gens):
        lo, hi = gens.psi1.support
        assert lo == 0.0
        assert hi == pytest.approx(gens.support_width, rel=1e-12)


class TestDecayVerification:
    def test_default_generators_report(self, gens):
        rep = verify_decay_conditions(gens)
        assert rep.alpha == 5.5 and rep.gamma == 4.0
        assert math.isfinite(rep.c1) and rep.c1 > 0
        by_region = {(r.condition, r.region): r for r in rep.rows}
        near = by_region[("i", "near-zero")]
        # near-zero envelope beats the target exponent
        assert near.passed and near.fitted_exponent > 5.5
        # compact support costs frequency tails: the fitted tail exponents
        # sit near 2.5 for this family, short of the 4.0 target
        for key in (("i", "xi1-tail"), ("i", "xi2-tail"), ("ii", "xi2-tail")):
            row = by_region[key]
            assert not row.passed
            assert 1.5 < row.fitted_exponent < 4.0
        assert not rep.passed

    def test_raise_on_violation(self, gens):
        with pytest.raises(ConditionViolated):
            verify_decay_conditions(gens, raise_on_violation=True)

    def test_bandlimited_pair_passes(self):
        rep = verify_decay_conditions(meyer_spectral_pair(), alpha=5.5, gamma=4.0)
        assert rep.passed
        for row in rep.rows:
            assert row.passed
