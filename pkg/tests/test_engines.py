import dataclasses
import math

import numpy as np
import pytest

from seqnull.boundaries import BoundarySpec, Family, boundary_curve
from seqnull.engines import (
    AlreadyPickedError,
    Combiner,
    DecisionView,
    Hypothesis,
    ImtSession,
    IncompatibleBoundaryError,
    ScreeningRule,
    SessionStoppedError,
    UnknownHypothesisError,
    batch_fisher,
    batch_stouffer,
    bonferroni_batch,
    bonferroni_online,
    chisq_increment,
    fisher_increment,
    imt_session_new,
    online_bonferroni_weights,
    run_amt_batch,
    run_amt_online,
    run_calibrator_test,
    run_imt_online,
    run_preordered,
    stouffer_increment,
)
from seqnull.masking import MIXTURE, TENT, MaskScheme, SchemeKind

LIN25 = BoundarySpec(Family.GAUSSIAN_LINEAR, 0.05, m=25)
STITCHED = BoundarySpec(Family.GAUSSIAN_STITCHED, 0.05)
CAL_HALF = MaskScheme(SchemeKind.CALIBRATOR, c=0.5)


class TestIncrements:
    def test_stouffer(self):
        assert stouffer_increment(0.5) == 0.0
        # Phi(3) = 0.99865 from an independent normal-CDF table
        assert stouffer_increment(0.0013499) == pytest.approx(3.0, abs=1e-3)
        assert stouffer_increment(0.99865) == pytest.approx(-3.0, abs=1e-3)

    def test_fisher(self):
        assert fisher_increment(1.0) == 0.0
        assert fisher_increment(math.exp(-1)) == pytest.approx(2.0, rel=1e-12)

    def test_chisq(self):
        assert chisq_increment(0.5) == 0.0

    def test_saturation(self):
        assert math.isfinite(stouffer_increment(0.0))
        assert math.isfinite(stouffer_increment(1.0))
        assert math.isfinite(fisher_increment(0.0))


class TestPreordered:
    def test_strong_front_crossing_matches_hand_oracle(self):
        # 50 copies of p with Phi^{-1}(1-p) = 3, then uniforms: the sum 3k
        # crosses the line at the first k with 3k > slope*k + intercept
        p3 = 1.0 - 0.9986501019683699
        rng = np.random.default_rng(5)
        ps = [p3] * 50 + list(rng.random(100))
        state = run_preordered(ps, Combiner.STOUFFER, LIN25)
        slope = math.sqrt(-math.log(0.05) / 50)
        intercept = math.sqrt(-25 * math.log(0.05) / 2)
        k_hand = math.ceil(intercept / (3.0 - slope))
        assert state.rejected_at is not None and state.rejected_at <= 50
        assert state.rejected_at == k_hand
        assert state.status == "rejected"

    def test_all_half_never_rejects(self):
        state = run_preordered([0.5] * 200, Combiner.STOUFFER, LIN25)
        assert state.rejected_at is None
        assert state.status == "exhausted"
        assert np.all(state.stats == 0.0)

    def test_trajectory_shape(self):
        state = run_preordered([0.5] * 7, Combiner.STOUFFER, LIN25)
        traj = state.trajectory
        assert len(traj) == state.k == 7
        assert [t.k for t in traj] == list(range(1, 8))
        assert np.allclose([t.bound for t in traj], boundary_curve(LIN25, 7))

    def test_compatibility_guard(self):
        with pytest.raises(IncompatibleBoundaryError):
            run_preordered([0.5], Combiner.FISHER, LIN25)
        with pytest.raises(IncompatibleBoundaryError):
            run_preordered([0.5], Combiner.STOUFFER, BoundarySpec(Family.EXP_LINEAR, 0.05, m=10))
        with pytest.raises(IncompatibleBoundaryError):
            run_preordered([0.5], Combiner.CHISQ, BoundarySpec(Family.GAMMA_CURVED, 0.05))

    def test_fisher_centering(self):
        # raw increments -2 log p, centered by -2 per step
        state = run_preordered([math.exp(-1)] * 3, Combiner.FISHER, BoundarySpec(Family.EXP_LINEAR, 0.05, m=10))
        assert np.allclose(state.stats, [0.0, 0.0, 0.0])

    def test_null_level_monte_carlo(self):
        reps, n = 200, 2000
        rng = np.random.default_rng(55)
        boundary = BoundarySpec(Family.GAUSSIAN_LINEAR, 0.05, m=n / 4)
        rejections = sum(
            run_preordered(rng.random(n), Combiner.STOUFFER, boundary).rejected_at is not None
            for _ in range(reps)
        )
        assert rejections / reps <= 0.05 + 3 * math.sqrt(0.05 * 0.95 / reps)


class TestAmtBatch:
    def test_hand_enumeration(self):
        state = run_amt_batch([0.01, 0.6, 0.98], TENT, STITCHED)
        assert state.included == [1, 3, 2]
        assert np.allclose(state.stats, [1.0, 0.0, -1.0])
        assert state.rejected_at is None  # u(1) = 2.93 > 1

    def test_deterministic_walk_all_small(self):
        # bits all +1: rejects at the smallest k with k > u(k)
        n = 60
        state = run_amt_batch([0.4999] * n, TENT, STITCHED)
        curve = boundary_curve(STITCHED, n)
        k_expect = int(np.argmax(np.arange(1, n + 1) > curve)) + 1
        assert state.rejected_at == k_expect

    def test_ties_broken_by_id(self):
        state = run_amt_batch([0.3, 0.3, 0.3], TENT, STITCHED)
        assert state.included == [1, 2, 3]

    def test_scheme_guard(self):
        with pytest.raises(ValueError):
            run_amt_batch([0.5], CAL_HALF, STITCHED)

    def test_null_level_monte_carlo(self):
        reps, n = 200, 2000
        rng = np.random.default_rng(56)
        boundary = BoundarySpec(Family.GAUSSIAN_LINEAR, 0.05, m=n / 4)
        rejections = sum(
            run_amt_batch(rng.random(n), TENT, boundary).rejected_at is not None
            for _ in range(reps)
        )
        assert rejections / reps <= 0.05 + 3 * math.sqrt(0.05 * 0.95 / reps)


class TestAmtOnline:
    def test_hand_enumeration(self):
        state = run_amt_online([0.6, 0.01, 0.97], ScreeningRule(0.05), TENT, STITCHED)
        assert state.included == [2, 3]
        assert state.statistic == 0.0
        assert state.arrivals.tolist() == [2, 3]

    def test_threshold_half_includes_everything(self):
        state = run_amt_online([0.3, 0.6, 0.2, 0.9], ScreeningRule(0.5), TENT, STITCHED)
        assert state.included == [1, 2, 3, 4]

    def test_screening_rule_validation(self):
        with pytest.raises(ValueError):
            ScreeningRule(0.0)
        with pytest.raises(ValueError):
            ScreeningRule(0.7)

    def test_null_level_monte_carlo(self):
        reps, n = 200, 2000
        rng = np.random.default_rng(57)
        rejections = sum(
            run_amt_online(rng.random(n), ScreeningRule(0.05), TENT, STITCHED).rejected_at
            is not None
            for _ in range(reps)
        )
        assert rejections / reps <= 0.05 + 3 * math.sqrt(0.05 * 0.95 / reps)


class TestImtSession:
    def test_pick_reveals_and_updates(self):
        session, view = imt_session_new(
            [Hypothesis(1, 0.01), Hypothesis(2, 0.6), Hypothesis(3, 0.98)], TENT, STITCHED
        )
        assert [h.id for h in view] == [1, 2, 3]
        assert all(not hasattr(h, "bit") for h in view)
        p, state = session.pick(1)
        assert p == 0.01
        assert state.statistic == 1.0

    def test_error_conditions_are_distinct(self):
        session, _ = imt_session_new([Hypothesis(1, 0.2), Hypothesis(2, 0.7)], TENT, STITCHED)
        session.pick(1)
        with pytest.raises(AlreadyPickedError):
            session.pick(1)
        with pytest.raises(UnknownHypothesisError):
            session.pick(99)
        session.pick(2)
        assert session.state.status == "exhausted"
        with pytest.raises(SessionStoppedError):
            session.pick(2)

    def test_exhaustion_without_crossing(self):
        session, view = imt_session_new([Hypothesis(i, 0.5) for i in range(5)], TENT, STITCHED)
        for h in view:
            session.pick(h.id)
        assert session.state.status == "exhausted"
        assert session.k == 5

    def test_unrevealed_p_is_refused(self):
        session, _ = imt_session_new([Hypothesis(1, 0.2), Hypothesis(2, 0.7)], TENT, STITCHED)
        session.pick(1)
        assert session.revealed_p(1) == 0.2
        with pytest.raises(UnknownHypothesisError):
            session.revealed_p(2)

    def test_statistic_bookkeeping_exact(self):
        rng = np.random.default_rng(8)
        hyps = [Hypothesis(i, float(p)) for i, p in enumerate(rng.random(64))]
        session, view = imt_session_new(hyps, TENT, STITCHED)
        from seqnull.masking import mask

        total = 0.0
        for h in sorted(view, key=lambda x: x.masked):
            if session.stopped:
                break
            session.pick(h.id)
            total += mask(dict((hh.id, hh.p) for hh in hyps)[h.id], TENT).bit
            assert session.statistic == total  # exact: +/-1 bits in floats

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError):
            ImtSession([Hypothesis(1, 0.2), Hypothesis(1, 0.7)], TENT, STITCHED)


class TestReductions:
    def test_imt_smallest_masked_equals_amt_batch(self):
        rng = np.random.default_rng(11)
        for trial in range(5):
            hyps = [Hypothesis(i, float(p)) for i, p in enumerate(rng.random(300))]
            batch = run_amt_batch(hyps, TENT, STITCHED)
            session, view = imt_session_new(hyps, TENT, STITCHED)
            for h in sorted(view, key=lambda x: (x.masked, x.id)):
                if session.stopped:
                    break
                session.pick(h.id)
            state = session.state
            assert state.included == batch.included
            assert np.array_equal(state.stats, batch.stats)
            assert state.rejected_at == batch.rejected_at

    def test_imt_online_threshold_equals_amt_online(self):
        rng = np.random.default_rng(13)
        for trial in range(5):
            ps = rng.random(500)
            amt = run_amt_online(ps, ScreeningRule(0.05), TENT, STITCHED)
            imt = run_imt_online(ps, lambda v: v.masked < 0.05, TENT, STITCHED)
            assert imt.included == amt.included
            assert np.array_equal(imt.stats, amt.stats)
            assert imt.rejected_at == amt.rejected_at

    def test_include_all_decision_equals_preordered_bits(self):
        rng = np.random.default_rng(14)
        ps = rng.random(300)
        imt = run_imt_online(ps, lambda v: True, TENT, STITCHED)
        from seqnull.masking import mask_arrays

        bits, _ = mask_arrays(ps, TENT)
        assert np.array_equal(imt.stats, np.cumsum(bits))


class TestImtOnlineFiltration:
    def test_decision_view_has_no_bit(self):
        fields = {f.name for f in dataclasses.fields(DecisionView)}
        assert "bit" not in fields and "p" not in fields
        assert {"id", "arrival", "covariates", "masked", "past"} <= fields

    def test_skip_reveals_p_into_filtration(self):
        seen = []

        def decide(view):
            seen.append(tuple(view.past))
            return view.masked < 0.05

        run_imt_online([0.6, 0.9, 0.02], decide, TENT, STITCHED)
        # third decision sees both earlier p-values even though both skipped
        assert [p.p for p in seen[2]] == [0.6, 0.9]
        assert [p.included for p in seen[2]] == [False, False]

    def test_stopped_session_refuses_steps(self):
        from seqnull.engines import OnlineImtSession

        session = OnlineImtSession(TENT, STITCHED, horizon=2)
        session.step(Hypothesis(1, 0.4), True)
        session.step(Hypothesis(2, 0.4), True)
        assert session.stopped
        with pytest.raises(SessionStoppedError):
            session.step(Hypothesis(3, 0.4), True)


class TestCalibratorTest:
    def test_single_strong_p_rejects_immediately(self):
        # 0.5 p^{-1/2} >= 20 iff p <= 0.000625
        state = run_calibrator_test([0.0006], CAL_HALF, 0.05)
        assert state.rejected_at == 1
        state2 = run_calibrator_test([0.00063], CAL_HALF, 0.05)
        assert state2.rejected_at is None

    def test_exact_threshold_rejects(self):
        # the rule is >= log(1/alpha)
        state = run_calibrator_test([0.000625], CAL_HALF, 0.05)
        assert state.rejected_at == 1

    def test_all_p_star_never_rejects(self):
        state = run_calibrator_test([0.25] * 100, CAL_HALF, 0.05)
        assert state.rejected_at is None
        assert np.allclose(state.stats, 0.0)

    def test_explicit_order(self):
        hyps = [Hypothesis(7, 0.5), Hypothesis(8, 0.001)]
        state = run_calibrator_test(hyps, CAL_HALF, 0.05, order=[8, 7])
        assert state.included[0] == 8

    def test_null_level_monte_carlo(self):
        reps, n = 200, 2000
        rng = np.random.default_rng(58)
        for scheme in (CAL_HALF, MIXTURE):
            rejections = sum(
                run_calibrator_test(rng.random(n), scheme, 0.05).rejected_at is not None
                for _ in range(reps)
            )
            assert rejections / reps <= 0.05 + 3 * math.sqrt(0.05 * 0.95 / reps)

    def test_scheme_guard(self):
        with pytest.raises(ValueError):
            run_calibrator_test([0.5], TENT, 0.05)


class TestBonferroni:
    def test_batch_examples(self):
        assert bonferroni_batch([0.001] + [0.5] * 9, 0.05)
        assert not bonferroni_batch([0.5] * 10, 0.05)

    def test_online_rejects_at_first_hit(self):
        state = bonferroni_online([0.5, 0.0001, 0.9], alpha=0.05)
        assert state.rejected_at == 2
        assert state.status == "rejected"

    def test_online_never_rejects_on_half(self):
        state = bonferroni_online([0.5] * 500, alpha=0.05)
        assert state.rejected_at is None

    def test_weights_structure(self):
        w = online_bonferroni_weights(0.05, np.arange(1, 50))
        assert w[0] == 0.0
        assert np.all(np.diff(w[1:]) < 0)

    def test_explicit_weights_validated(self):
        with pytest.raises(ValueError):
            bonferroni_online([0.5] * 3, alpha=0.05, weights=[0.04, 0.04, 0.04])

    @pytest.mark.slow
    def test_default_weights_sum_to_alpha(self):
        # partial sum to 10^8 plus the integral tail bound, against alpha
        alpha = 0.05
        total = 0.0
        for start in range(2, 10**8, 10**7):
            ks = np.arange(start, min(start + 10**7, 10**8), dtype=float)
            total += float(np.sum(online_bonferroni_weights(alpha, ks)))
        from seqnull.engines import _weight_norm

        tail = (alpha / _weight_norm()) / math.log(10**8)
        assert total + tail == pytest.approx(alpha, abs=1e-6)


class TestBatchClassics:
    def test_stouffer_single(self):
        assert batch_stouffer([0.04], 0.05)
        assert not batch_stouffer([0.06], 0.05)

    def test_half_accepts(self):
        assert not batch_stouffer([0.5] * 10, 0.05)
        assert not batch_fisher([0.5] * 10, 0.05)

    def test_null_level(self):
        reps, n = 500, 2000
        rng = np.random.default_rng(59)
        st_rej = fi_rej = 0
        for _ in range(reps):
            ps = rng.random(n)
            st_rej += batch_stouffer(ps, 0.05)
            fi_rej += batch_fisher(ps, 0.05)
        band = 3 * math.sqrt(0.05 * 0.95 / reps)
        assert abs(st_rej / reps - 0.05) <= band
        assert abs(fi_rej / reps - 0.05) <= band


class TestMirrorConservativeRobustness:
    def test_amt_type_one_error_with_conservative_nulls(self):
        # null p-values from negative-mean scores are mirror-conservative
        from scipy import stats as sps

        reps, n = 200, 1000
        rng = np.random.default_rng(60)
        rejections = 0
        for _ in range(reps):
            ps = sps.norm.sf(rng.standard_normal(n) - 2.0)
            rejections += run_amt_batch(ps, TENT, STITCHED).rejected_at is not None
        assert rejections / reps <= 0.05 + 3 * math.sqrt(0.05 * 0.95 / reps)


class TestLogReplay:
    def test_batch_session_log_replays_exactly(self):
        rng = np.random.default_rng(33)
        hyps = [Hypothesis(i, float(p)) for i, p in enumerate(rng.random(120))]
        session, view = imt_session_new(hyps, TENT, STITCHED)
        for h in sorted(view, key=lambda x: (x.masked, x.id))[:60]:
            if session.stopped:
                break
            session.pick(h.id)
        from seqnull.engines import replay_session_log, session_events
        import json

        # round-trip through the JSON-lines wire format
        lines = [json.dumps(e) for e in session_events(session)]
        events = [json.loads(line) for line in lines]
        replayed = replay_session_log(hyps, events, TENT, STITCHED)
        assert replayed.statistic == session.statistic
        assert replayed.included == session.included
        assert replayed.state.status == session.state.status
        assert np.array_equal(replayed.state.stats, session.state.stats)

    def test_online_session_log_replays_exactly(self):
        from seqnull.engines import OnlineImtSession, replay_online_log, session_events
        import json

        rng = np.random.default_rng(34)
        session = OnlineImtSession(TENT, STITCHED, horizon=300)
        for t, p in enumerate(rng.random(300), start=1):
            session.step(Hypothesis(t, float(p)), include=p < 0.2 or p > 0.9)
            if session.stopped:
                break
        lines = [json.dumps(e) for e in session_events(session)]
        events = [json.loads(line) for line in lines]
        replayed = replay_online_log(events, TENT, STITCHED, horizon=300)
        assert replayed.statistic == session.statistic
        assert replayed.included == session.included
        assert np.array_equal(replayed.state.stats, session.state.stats)
        assert replayed.rejected_at == session.rejected_at
