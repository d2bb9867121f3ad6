import json

import numpy as np
import pytest

from seqnull.boundaries import BoundarySpec, Family
from seqnull.cli import main
from seqnull.engines import ScreeningRule, run_amt_online, run_imt_online
from seqnull.harness import TestConfig, estimate_power, run_figure
from seqnull.masking import TENT
from seqnull.models import block_adaptive_threshold
from seqnull.scenarios import OnlineBlocks

CURVED = BoundarySpec(Family.GAUSSIAN_STITCHED, 0.05)


class TestAdaptiveScreening:
    def test_vectorized_rule_equals_decision_callback(self):
        rng = np.random.default_rng(3)
        for trial in range(3):
            ps = rng.random(600)
            rule = ScreeningRule(0.05, adaptive=block_adaptive_threshold)
            fast = run_amt_online(ps, rule, TENT, CURVED)

            def decide(view):
                c_t = block_adaptive_threshold([p.p for p in view.past], 0.05)
                return view.masked < c_t

            slow = run_imt_online(ps, decide, TENT, CURVED)
            assert fast.included == slow.included
            assert np.array_equal(fast.stats, slow.stats)
            assert fast.rejected_at == slow.rejected_at

    @pytest.mark.slow
    def test_block_adaptive_not_slower_than_fixed_threshold(self):
        # Paired comparison (same seeds -> same streams) at mu = 2. The true
        # mean-detection gap on this configuration is a statistical tie
        # (measured -5 +- 28 arrivals over 600 paired reps, adaptive side
        # trending faster), so the check is non-inferiority at 3 paired SEs
        # rather than a strict ordering no feasible rep count can resolve.
        import numpy as np

        from seqnull.harness import run_one
        from seqnull.scenarios import generate

        reps = 150
        scenario = OnlineBlocks(mu=2.0, horizon=30_000, reps=reps)
        imt_cfg = TestConfig("imt_adaptive_block", c=0.05, boundary=CURVED)
        amt_cfg = TestConfig("amt_online", c=0.05, boundary=CURVED)
        entropy = np.random.SeedSequence(9).generate_state(reps, dtype=np.uint64).tolist()
        diffs = []
        for e in entropy:
            seq = np.random.SeedSequence(e)
            gen = generate(scenario, seed=seq.spawn(1)[0])
            rng = np.random.default_rng(seq)
            r1, w1 = run_one(imt_cfg, gen, rng)
            r2, w2 = run_one(amt_cfg, gen, rng)
            diffs.append((w1 if r1 else 30_000) - (w2 if r2 else 30_000))
        d = np.asarray(diffs, dtype=float)
        assert d.mean() <= 3.0 * d.std(ddof=1) / np.sqrt(reps)


class TestFigureSmoke:
    @pytest.mark.parametrize("figure", ["1b", "6", "7", "8", "D", "E"])
    def test_runs_and_writes_schema(self, figure, tmp_path):
        path = run_figure(figure, tmp_path, seed=5, reps=2)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "x,method,mean,stderr,reps,censored"
        assert len(lines) > 4


class TestCli:
    def test_run_figure(self, tmp_path, capsys):
        assert main(["run", "--figure", "10", "--seed", "1", "--reps", "1", "--out", str(tmp_path)]) == 0
        out = capsys.readouterr().out.strip()
        assert out.endswith("figure_10.csv")

    def test_power_command(self, tmp_path, capsys):
        scenario = tmp_path / "scenario.json"
        scenario.write_text(
            json.dumps({"kind": "ConservativeNulls", "n": 200, "n_nonnull": 40, "mu": 3.0, "reps": 20})
        )
        test_cfg = tmp_path / "test.json"
        test_cfg.write_text(json.dumps({"method": "batch_stouffer", "alpha": 0.05}))
        assert main(["power", "--scenario", str(scenario), "--test", str(test_cfg), "--reps", "20"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["mode"] == "power"
        assert 0.0 <= payload["value"] <= 1.0

    def test_condition_command(self, capsys):
        assert main(
            [
                "condition", "--n0", "500", "--n1", "100",
                "--grid", "0.5:6:0.5", "--draws", "10000",
            ]
        ) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["mu"] == pytest.approx(payload["mu"])  # numeric


class TestTreeFigureOrdering:
    def test_tree_imt_beats_level_order_at_strong_signal(self):
        # frozen-seed qualitative check on the fixed 801-node tree
        from seqnull.boundaries import BoundarySpec, Family
        from seqnull.harness import estimate_power
        from seqnull.scenarios import BatchTree

        reps = 200
        scenario = BatchTree(mu=3.0, reps=reps)
        imt = estimate_power(
            scenario,
            TestConfig("imt_tree", boundary=BoundarySpec(Family.GAUSSIAN_LINEAR, 0.05, m=8)),
            reps=reps,
            seed=12,
        )
        mst = estimate_power(
            scenario,
            TestConfig("mst", boundary=BoundarySpec(Family.GAUSSIAN_LINEAR, 0.05, m=801 / 4)),
            reps=reps,
            seed=12,
        )
        batch = estimate_power(scenario, TestConfig("batch_stouffer"), reps=reps, seed=12)
        assert imt.value > mst.value
        assert imt.value > batch.value + 0.2
