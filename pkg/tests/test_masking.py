import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps
from scipy.integrate import quad

from seqnull.masking import (
    MIXTURE,
    RAILWAY,
    TENT,
    MaskPair,
    MaskScheme,
    MaskingError,
    SchemeKind,
    calibrator_density,
    mask,
    mask_arrays,
    mask_statistic,
    mean_independence_check,
    mixture_density,
    p_star,
    unmask,
    unmask_arrays,
)

CAL_HALF = MaskScheme(SchemeKind.CALIBRATOR, c=0.5)
ALL_SCHEMES = [TENT, RAILWAY, CAL_HALF, MaskScheme(SchemeKind.CALIBRATOR, c=0.3), MIXTURE]


class TestMask:
    def test_railway_conservative_example(self):
        pair = mask(0.99, RAILWAY)
        assert pair.masked == pytest.approx(0.49, abs=1e-12)
        assert pair.bit == -1.0

    def test_tent_example(self):
        pair = mask(0.7, TENT)
        assert pair.bit == -1.0
        assert pair.masked == pytest.approx(0.3, abs=1e-12)

    def test_calibrator_h_solution(self):
        # H(0.81) = 0.9 - 0.81 = 0.09; y^2 - y + 0.09 = 0 gives y = 0.1, x = 0.01
        pair = mask(0.81, CAL_HALF)
        assert pair.masked == pytest.approx(0.01, abs=1e-10)

    def test_calibrator_p_star(self):
        # p_* = c^(1/(1-c)) = 0.25 for c = 0.5; bit there is log f = 0
        assert p_star(CAL_HALF) == pytest.approx(0.25, rel=1e-12)
        pair = mask(0.25, CAL_HALF)
        assert pair.bit == pytest.approx(0.0, abs=1e-12)
        assert pair.masked == pytest.approx(0.25, abs=1e-12)

    def test_mixture_bit_at_inv_e(self):
        # f_m(1/e) = (1 - 2/e)/(1/e) = e - 2
        pair = mask(math.exp(-1), MIXTURE)
        assert pair.bit == pytest.approx(math.log(math.e - 2.0), abs=1e-12)

    def test_half_point_convention(self):
        # indicator 1{p < 0.5} makes the bit -1 at exactly 0.5
        assert mask(0.5, TENT) == MaskPair(-1.0, 0.5)
        # railway: (1.0 mod 1) = 0, the formula's literal value
        assert mask(0.5, RAILWAY) == MaskPair(-1.0, 0.0)

    def test_rejects_out_of_range(self):
        with pytest.raises(MaskingError):
            mask(1.2, TENT)
        with pytest.raises(MaskingError):
            mask(-0.1, RAILWAY)

    def test_endpoint_saturation(self):
        assert math.isfinite(mask(0.0, CAL_HALF).bit)
        assert math.isfinite(mask(1.0, MIXTURE).bit)


class TestUnmask:
    def test_examples(self):
        assert unmask(MaskPair(-1.0, 0.3), TENT) == pytest.approx(0.7)
        assert unmask(MaskPair(1.0, 0.49), RAILWAY) == pytest.approx(0.49)
        assert unmask(MaskPair(-1.0, 0.49), RAILWAY) == pytest.approx(0.99)

    def test_round_trip_large(self):
        rng = np.random.default_rng(12)
        ps = rng.random(100_000)
        for scheme in ALL_SCHEMES:
            bits, masked = mask_arrays(ps, scheme)
            back = unmask_arrays(bits, masked, scheme)
            assert np.abs(back - ps).max() < 1e-12, scheme

    def test_scalar_round_trip_includes_edges(self):
        for scheme in (TENT, RAILWAY):
            for p in (0.0, 0.25, 0.5, 0.75, 1.0):
                assert unmask(mask(p, scheme), scheme) == pytest.approx(p, abs=1e-12)

    def test_inconsistent_pair_rejected(self):
        with pytest.raises(MaskingError):
            unmask(MaskPair(1.0, 0.7), TENT)  # masked out of [0, 0.5]
        with pytest.raises(MaskingError):
            unmask(MaskPair(0.5, 0.3), TENT)  # bit not +/-1
        with pytest.raises(MaskingError):
            # bit implies p = 0.81 whose masked value is 0.01, not 0.2
            unmask(MaskPair(mask(0.81, CAL_HALF).bit, 0.2), CAL_HALF)

    @given(p=st.floats(1e-6, 1 - 1e-6), scheme=st.sampled_from(ALL_SCHEMES))
    @settings(max_examples=200, deadline=None)
    def test_round_trip_property(self, p, scheme):
        assert unmask(mask(p, scheme), scheme) == pytest.approx(p, abs=1e-10)


class TestMaskStatistic:
    def test_examples(self):
        assert mask_statistic(2.3) == MaskPair(1.0, 2.3)
        assert mask_statistic(-2.3) == MaskPair(-1.0, 2.3)
        assert mask_statistic(0.0) == MaskPair(-1.0, 0.0)

    def test_nonfinite(self):
        with pytest.raises(MaskingError):
            mask_statistic(float("nan"))


class TestDistributional:
    def test_masked_uniform_on_half(self):
        rng = np.random.default_rng(3)
        ps = rng.random(100_000)
        for scheme in (TENT, RAILWAY):
            _, masked = mask_arrays(ps, scheme)
            stat = sps.kstest(masked, sps.uniform(loc=0, scale=0.5).cdf).statistic
            assert stat < 0.006, scheme

    def test_bit_masked_uncorrelated(self):
        rng = np.random.default_rng(4)
        n = 200_000
        ps = rng.random(n)
        for scheme in (TENT, RAILWAY):
            bits, masked = mask_arrays(ps, scheme)
            corr = np.corrcoef(bits, masked)[0, 1]
            assert abs(corr) < 4.0 / math.sqrt(n), scheme

    def test_mean_independence_diagnostic(self):
        assert mean_independence_check(TENT, 10**6, seed=1) < 0.01
        assert mean_independence_check(CAL_HALF, 10**6, seed=1) < 0.01
        assert mean_independence_check(RAILWAY, 10**6, seed=1) < 0.01

    def test_mean_independence_rejects_small_draws(self):
        with pytest.raises(ValueError):
            mean_independence_check(TENT, 100, seed=0)


class TestCalibratorShape:
    def test_normalization(self):
        for c in (0.2, 0.4, 0.6, 0.8):
            val = quad(lambda p: c * p ** (c - 1.0), 0, 1)[0]
            assert val == pytest.approx(1.0, abs=1e-6)
        # f_m under p = e^t; the transform keeps the endpoint mass integrable
        val = quad(
            lambda t: (1.0 - np.exp(t) + t * np.exp(t)) / t**2, -np.inf, -1e-9, limit=500
        )[0]
        assert val == pytest.approx(1.0, abs=1e-6)

    def test_density_matches_formula(self):
        for p in (0.01, 0.3, 0.9):
            assert float(mixture_density(p)) == pytest.approx(
                (1 - p + p * math.log(p)) / (p * math.log(p) ** 2), rel=1e-10
            )
            assert float(calibrator_density(p, 0.3)) == pytest.approx(
                0.3 * p ** (-0.7), rel=1e-12
            )

    def test_two_solution_structure(self):
        # for every p > p_*, the masked value is the unique second preimage
        # of H in [0, p_*]; the mixture's preimage underflows floats past
        # p ~ 0.99, where the masked value saturates near zero instead
        for scheme in (CAL_HALF, MaskScheme(SchemeKind.CALIBRATOR, c=0.7), MIXTURE):
            ps_ = p_star(scheme)
            rng = np.random.default_rng(9)
            for p in ps_ + (0.99 - ps_) * rng.random(50):
                g = mask(float(p), scheme).masked
                assert 0.0 <= g <= ps_ + 1e-12
                if scheme.kind is SchemeKind.CALIBRATOR:
                    h = lambda x: x**scheme.c - x  # noqa: E731
                else:
                    h = lambda x: (x - 1) / math.log(x) - x  # noqa: E731
                assert h(max(g, 1e-300)) == pytest.approx(h(p), abs=1e-9)

    def test_scheme_json_round_trip(self):
        for scheme in ALL_SCHEMES:
            assert MaskScheme.from_json(scheme.to_json()) == scheme
