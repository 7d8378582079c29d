import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from infocredit.divergence import (LN2, DiscreteDistribution, js_divergence, kl_divergence, psi,
                                   to_bits)
from infocredit.errors import (AbsoluteContinuityViolation, InvalidDistribution, LengthMismatch,
                               ZeroBinMass)

# 50-digit term-by-term sums for p=(1/2, 1/2), q=(1/4, 3/4)
KL_HALF_QUARTER = 0.14384103622589046371960950299691371575175485544888
PSI_HALF_QUARTER = 0.27465307216702742284881130923063142616187263945569


def _mp_oracle():
    with mpmath.workdps(50):
        p = [mpmath.mpf(1) / 2] * 2
        q = [mpmath.mpf(1) / 4, mpmath.mpf(3) / 4]
        kl = mpmath.fsum(a * mpmath.log(a / b) for a, b in zip(p, q))
        ps = mpmath.fsum((a - b) * mpmath.log(a / b) for a, b in zip(p, q))
        return float(kl), float(ps)


def positive_dists(min_size=2, max_size=12):
    return st.integers(min_size, max_size).flatmap(
        lambda k: arrays(np.float64, k, elements=st.floats(1e-3, 1.0)).map(lambda a: a / a.sum())
    )


def dist_pairs(min_size=2, max_size=12, allow_zero=False):
    lo = 0.0 if allow_zero else 1e-3

    def build(k):
        el = st.floats(lo, 1.0)
        arr = arrays(np.float64, k, elements=el).filter(lambda a: a.sum() > 0)
        return st.tuples(arr, arr).map(lambda t: (t[0] / t[0].sum(), t[1] / t[1].sum()))

    return st.integers(min_size, max_size).flatmap(build)


class TestDistribution:
    def test_renormalizes_within_tolerance(self):
        d = DiscreteDistribution([0.5, 0.5 + 5e-10])
        assert math.isclose(d.mass.sum(), 1.0, abs_tol=1e-15)

    @pytest.mark.parametrize("mass", [[], [0.5, 0.4], [-0.1, 1.1], [np.nan, 1.0]])
    def test_rejects_invalid(self, mass):
        with pytest.raises(InvalidDistribution):
            DiscreteDistribution(mass)

    def test_from_counts(self):
        d = DiscreteDistribution.from_counts([10, 30])
        np.testing.assert_allclose(d.mass, [0.25, 0.75])

    def test_immutable(self):
        d = DiscreteDistribution([0.2, 0.8])
        with pytest.raises(ValueError):
            d.mass[0] = 0.5


class TestKl:
    def test_identical_is_zero(self):
        assert kl_divergence([0.5, 0.5], [0.5, 0.5]) == 0.0

    def test_point_mass_vs_uniform(self):
        assert kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2), abs=1e-15)

    def test_high_precision_oracle(self):
        assert _mp_oracle()[0] == pytest.approx(KL_HALF_QUARTER, abs=1e-16)
        assert kl_divergence([0.5, 0.5], [0.25, 0.75]) == pytest.approx(KL_HALF_QUARTER, abs=1e-15)

    def test_absolute_continuity(self):
        with pytest.raises(AbsoluteContinuityViolation):
            kl_divergence([0.5, 0.5], [1.0, 0.0])

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            kl_divergence([0.5, 0.5], [0.2, 0.3, 0.5])

    def test_asymmetry_witness(self):
        p, q = [0.98, 0.02], [0.3, 0.7]
        assert abs(kl_divergence(p, q) - kl_divergence(q, p)) > 0.1

    @settings(max_examples=200, deadline=None)
    @given(dist_pairs())
    def test_non_negative(self, pair):
        assert kl_divergence(*pair) >= 0.0


class TestPsi:
    def test_identity_is_zero(self):
        assert psi([0.1, 0.2, 0.7], [0.1, 0.2, 0.7]) == 0.0

    def test_high_precision_oracle(self):
        assert _mp_oracle()[1] == pytest.approx(PSI_HALF_QUARTER, abs=1e-16)
        assert psi([0.5, 0.5], [0.25, 0.75]) == pytest.approx(PSI_HALF_QUARTER, abs=1e-15)
        closed_form = 0.25 * math.log(2) + 0.25 * math.log(1.5)
        assert PSI_HALF_QUARTER == pytest.approx(closed_form, abs=1e-16)

    def test_one_sided_zero_raises(self):
        with pytest.raises(ZeroBinMass):
            psi([0.5, 0.5, 0.0], [0.4, 0.4, 0.2])

    def test_joint_zero_is_skipped(self):
        assert psi([0.5, 0.5, 0.0], [0.4, 0.6, 0.0]) == pytest.approx(psi([0.5, 0.5], [0.4, 0.6]))

    @settings(max_examples=300, deadline=None)
    @given(dist_pairs())
    def test_is_jeffreys(self, pair):
        p, q = pair
        assert abs(psi(p, q) - (kl_divergence(p, q) + kl_divergence(q, p))) < 1e-12

    @settings(max_examples=300, deadline=None)
    @given(dist_pairs())
    def test_symmetric(self, pair):
        p, q = pair
        assert psi(p, q) == pytest.approx(psi(q, p), abs=1e-14)


class TestJs:
    def test_identity(self):
        assert js_divergence([0.3, 0.7], [0.3, 0.7]) == 0.0

    def test_disjoint_attains_bound(self):
        assert js_divergence([1.0, 0.0], [0.0, 1.0]) == pytest.approx(LN2, abs=1e-15)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            js_divergence([1.0], [0.5, 0.5])

    @settings(max_examples=300, deadline=None)
    @given(dist_pairs(allow_zero=True))
    def test_bounded(self, pair):
        v = js_divergence(*pair)
        assert 0.0 <= v <= LN2 + 1e-12

    @settings(max_examples=300, deadline=None)
    @given(st.integers(2, 8).flatmap(lambda k: st.tuples(*[
        arrays(np.float64, k, elements=st.floats(0.0, 1.0)).filter(lambda a: a.sum() > 0)
        for _ in range(3)])))
    def test_sqrt_triangle(self, triple):
        p, q, r = (a / a.sum() for a in triple)
        d = lambda a, b: math.sqrt(js_divergence(a, b))  # noqa: E731
        assert d(p, r) <= d(p, q) + d(q, r) + 1e-9


def test_to_bits():
    assert to_bits(math.log(2)) == pytest.approx(1.0)
