import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqnull.boundaries import (
    BoundarySpec,
    Family,
    boundary_curve,
    curve_constant,
    discrete_mixture_boundary,
    eval_boundary,
    exp_linear_threshold,
    invert_boundary,
)
from seqnull.boundaries import _mixture_sum

ALL_FAMILIES = list(Family)


def make_spec(family, alpha, horizon=100_000):
    m = 2500.0 if family in (Family.GAUSSIAN_LINEAR, Family.EXP_LINEAR, Family.CHISQ_EXP_LINEAR) else None
    h = horizon if family is Family.GAUSSIAN_INVERTED_STITCHING else None
    if family is Family.GAUSSIAN_DISCRETE_MIXTURE:
        alpha = min(alpha, 0.5)  # the family's supported testing range
    return BoundarySpec(family, alpha, m=m, horizon=h)


class TestEvalBoundary:
    def test_gaussian_linear_values(self):
        spec = BoundarySpec(Family.GAUSSIAN_LINEAR, 0.05, m=100)
        # independent high-precision evaluation of the closed form
        assert eval_boundary(spec, 100) == pytest.approx(24.477468306808165, abs=1e-10)
        assert eval_boundary(spec, 200) == pytest.approx(36.716202460212248, abs=1e-10)

    def test_linear_terms_equal_at_k_equals_m(self):
        spec = BoundarySpec(Family.GAUSSIAN_LINEAR, 0.05, m=100)
        both = math.sqrt(100 * (-math.log(0.05)) / 2)
        assert eval_boundary(spec, 100) == pytest.approx(2 * both, rel=1e-12)

    def test_stitched_value(self):
        spec = BoundarySpec(Family.GAUSSIAN_STITCHED, 0.05)
        # log log 2 = -0.36651, 0.72*log(104) = 3.34396
        assert eval_boundary(spec, 1) == pytest.approx(2.9333984118, abs=1e-9)

    def test_alpha_monotonicity_grid(self):
        for family in ALL_FAMILIES:
            alphas = [0.01, 0.02, 0.05, 0.1, 0.2, 0.4, 0.8, 0.99]
            if family is Family.GAUSSIAN_DISCRETE_MIXTURE:
                alphas = [a for a in alphas if a <= 0.5]
            for k in (1, 7, 100, 5000):
                values = [eval_boundary(make_spec(family, a), k) for a in alphas]
                diffs = np.diff(values)
                assert np.all(diffs < 0), (family, k, values)

    def test_discrete_mixture_alpha_domain(self):
        with pytest.raises(ValueError):
            BoundarySpec(Family.GAUSSIAN_DISCRETE_MIXTURE, 0.8)

    def test_positive_everywhere(self):
        for family in ALL_FAMILIES:
            for alpha in (0.01, 0.05, 0.2):
                curve = boundary_curve(make_spec(family, alpha), 2000)
                assert np.all(curve > 0), (family, alpha)

    def test_k_validation(self):
        spec = BoundarySpec(Family.GAUSSIAN_STITCHED, 0.05)
        with pytest.raises(ValueError):
            eval_boundary(spec, 0)
        inv = BoundarySpec(Family.GAUSSIAN_INVERTED_STITCHING, 0.05, horizon=10)
        with pytest.raises(ValueError):
            eval_boundary(inv, 11)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            BoundarySpec(Family.GAUSSIAN_LINEAR, 0.05)  # missing m
        with pytest.raises(ValueError):
            BoundarySpec(Family.GAUSSIAN_STITCHED, 1.5)
        with pytest.raises(ValueError):
            BoundarySpec(Family.GAUSSIAN_INVERTED_STITCHING, 0.05)  # missing horizon

    def test_json_round_trip(self):
        spec = BoundarySpec(Family.EXP_LINEAR, 0.1, m=500)
        assert BoundarySpec.from_json(spec.to_json()) == spec

    @given(
        alpha_lo=st.floats(0.001, 0.25),
        bump=st.floats(0.01, 0.24),
        k=st.integers(1, 100_000),
        family=st.sampled_from(ALL_FAMILIES),
    )
    @settings(max_examples=60, deadline=None)
    def test_alpha_monotone_property(self, alpha_lo, bump, k, family):
        hi = min(alpha_lo + bump, 0.99)
        u_lo = eval_boundary(make_spec(family, alpha_lo), k)
        u_hi = eval_boundary(make_spec(family, hi), k)
        assert u_lo > u_hi


class TestCurveConstant:
    def test_formula(self):
        val = curve_constant(50, 0.05)
        expect = 1.7 * math.sqrt(math.log(math.log(100)) + 0.72 * math.log(5.2 / 0.05))
        assert val == pytest.approx(expect, rel=1e-14)

    def test_matches_stitched(self):
        spec = BoundarySpec(Family.GAUSSIAN_STITCHED, 0.05)
        for k in (1, 10, 1000, 99_999):
            assert curve_constant(k, 0.05) == pytest.approx(
                eval_boundary(spec, k) / math.sqrt(k), rel=1e-14
            )

    def test_monotone(self):
        ks = [curve_constant(k, 0.1) for k in (1, 2, 10, 100, 10_000)]
        assert all(b > a for a, b in zip(ks, ks[1:]))
        gammas = [curve_constant(10, g) for g in (0.01, 0.05, 0.2, 0.8)]
        assert all(b < a for a, b in zip(gammas, gammas[1:]))


class TestDiscreteMixture:
    def test_root_definition(self):
        for k in (1, 10, 500):
            s = discrete_mixture_boundary(0.05, k)
            assert _mixture_sum(0.05, s, k) == pytest.approx(20.0, abs=1e-9)

    def test_nondecreasing_in_k(self):
        values = [discrete_mixture_boundary(0.05, k) for k in range(1, 101)]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))

    def test_curve_matches_scalar(self):
        curve = boundary_curve(BoundarySpec(Family.GAUSSIAN_DISCRETE_MIXTURE, 0.05), 50)
        for k in (1, 17, 50):
            assert curve[k - 1] == pytest.approx(discrete_mixture_boundary(0.05, k), rel=1e-9)

    def test_validation(self):
        with pytest.raises(ValueError):
            discrete_mixture_boundary(1.2, 5)
        with pytest.raises(ValueError):
            discrete_mixture_boundary(0.05, 0)


class TestExpLinearThreshold:
    def test_root_plugs_back(self):
        for family, expo in (
            ("fisher", lambda x, m: -0.71 * x + (m / 2) * math.log1p(1.41 * x / m)),
            ("chisq", lambda x, m: -x / 2 + (m / 4) * math.log1p(2 * x / m)),
        ):
            for alpha in (0.1, 0.05, 0.01):
                x = exp_linear_threshold(alpha, 2500, family)
                assert math.exp(expo(x, 2500)) == pytest.approx(alpha, abs=1e-9)

    def test_monotone_in_alpha(self):
        xs = [exp_linear_threshold(a, 2500, "fisher") for a in (0.1, 0.05, 0.01)]
        assert xs[0] < xs[1] < xs[2]


class TestInvertBoundary:
    def test_linear_closed_form_round_trip(self):
        spec = BoundarySpec(Family.GAUSSIAN_LINEAR, 0.05, m=100)
        for k in (1, 100, 10_000):
            s = eval_boundary(spec, k)
            assert invert_boundary(spec, s, k) == pytest.approx(0.05, abs=1e-10)

    def test_linear_frozen_example(self):
        spec = BoundarySpec(Family.GAUSSIAN_LINEAR, 0.05, m=100)
        # s rounded to 4 decimals, so only ~1e-5 of alpha is recoverable
        assert invert_boundary(spec, 24.4775, 100) == pytest.approx(0.05, abs=1e-4)

    def test_stitched_round_trip(self):
        spec = BoundarySpec(Family.GAUSSIAN_STITCHED, 0.2)
        s = eval_boundary(spec, 50)
        assert invert_boundary(spec, s, 50) == pytest.approx(0.2, abs=1e-8)

    def test_round_trip_grid_all_families(self):
        alphas = np.logspace(math.log10(0.002), math.log10(0.5), 6)
        ks = [1, 5, 33, 400, 6000]
        for family in ALL_FAMILIES:
            for alpha in alphas:
                spec = make_spec(family, float(alpha), horizon=10_000)
                for k in ks:
                    s = eval_boundary(spec, k)
                    assert invert_boundary(spec, s, k) == pytest.approx(
                        float(alpha), abs=1e-8
                    ), (family, alpha, k)

    def test_clamps(self):
        spec = BoundarySpec(Family.GAUSSIAN_STITCHED, 0.05)
        assert invert_boundary(spec, 0.0, 10) == 1.0
        assert invert_boundary(spec, -3.0, 10) == 1.0
        assert invert_boundary(spec, 1e9, 10) <= 1e-12
        mix = BoundarySpec(Family.GAUSSIAN_DISCRETE_MIXTURE, 0.05)
        assert invert_boundary(mix, 1e9, 10) <= 1e-12
        assert invert_boundary(mix, 1e-9, 10) == 1.0


class TestDominanceShape:
    def test_linear_crosses_stitched(self):
        # m = n/4 with n = 10^4: above early, below for an interior window,
        # above again by k = 10^5
        lin = BoundarySpec(Family.GAUSSIAN_LINEAR, 0.05, m=2500)
        sti = BoundarySpec(Family.GAUSSIAN_STITCHED, 0.05)
        assert eval_boundary(lin, 1) > eval_boundary(sti, 1)
        assert eval_boundary(lin, 10_000) < eval_boundary(sti, 10_000)
        assert eval_boundary(lin, 100_000) > eval_boundary(sti, 100_000)


@pytest.mark.slow
class TestCrossingRates:
    """Monte-Carlo oracle: fraction of standard-Gaussian random walks ever
    crossing each boundary stays within the advertised level."""

    def test_gaussian_boundaries_full_scale(self):
        reps, horizon, alpha = 10_000, 10_000, 0.05
        rng = np.random.default_rng(2024)
        specs = {
            Family.GAUSSIAN_LINEAR: BoundarySpec(Family.GAUSSIAN_LINEAR, alpha, m=horizon / 4),
            Family.GAUSSIAN_STITCHED: BoundarySpec(Family.GAUSSIAN_STITCHED, alpha),
            Family.GAUSSIAN_DISCRETE_MIXTURE: BoundarySpec(Family.GAUSSIAN_DISCRETE_MIXTURE, alpha),
            Family.GAUSSIAN_INVERTED_STITCHING: BoundarySpec(
                Family.GAUSSIAN_INVERTED_STITCHING, alpha, horizon=horizon
            ),
        }
        curves = {f: boundary_curve(s, horizon) for f, s in specs.items()}
        crossed = {f: 0 for f in specs}
        for _ in range(20):
            walks = rng.standard_normal((reps // 20, horizon)).cumsum(axis=1)
            for f, curve in curves.items():
                crossed[f] += int((walks > curve).any(axis=1).sum())
        bound = alpha + 3 * math.sqrt(alpha * (1 - alpha) / reps)
        for f, count in crossed.items():
            assert count / reps <= bound, (f, count / reps)

    def test_fisher_linear_boundary_chisq2_walks(self):
        reps, horizon, alpha = 10_000, 10_000, 0.05
        rng = np.random.default_rng(7)
        spec = BoundarySpec(Family.EXP_LINEAR, alpha, m=horizon / 4)
        curve = boundary_curve(spec, horizon)
        crossed = 0
        for _ in range(20):
            # centered chi^2_2 increments: -2 log U - 2
            inc = -2.0 * np.log(rng.random((reps // 20, horizon))) - 2.0
            walks = inc.cumsum(axis=1)
            crossed += int((walks > curve).any(axis=1).sum())
        bound = alpha + 3 * math.sqrt(alpha * (1 - alpha) / reps)
        assert crossed / reps <= bound
