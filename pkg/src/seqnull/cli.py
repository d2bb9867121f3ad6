"""Command-line interface.

    seqnull run --figure 1a --seed 0 --reps 500 --out results/
    seqnull power --scenario scenario.json --test test.json [--reps N]
    seqnull condition --n0 1000 --n1 100 --alpha 0.05 --beta 0.05 --grid 0.25:8:0.25
    seqnull serve --host 127.0.0.1 --port 8000 --data-dir sessions/ --alpha 0.05
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .harness import (
    FIGURE_IDS,
    PowerConditionInputs,
    TestConfig,
    amt_sufficient_mu,
    estimate_power,
    run_figure,
)
from .scenarios import scenario_from_json

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqnull")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="generate a figure dataset as CSV")
    run.add_argument("--figure", required=True, choices=FIGURE_IDS)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--reps", type=int, default=500)
    run.add_argument("--out", required=True, help="output directory")

    power = sub.add_parser("power", help="estimate power/detection time")
    power.add_argument("--scenario", required=True, help="scenario JSON file")
    power.add_argument("--test", required=True, help="test config JSON file")
    power.add_argument("--reps", type=int, default=None)
    power.add_argument("--seed", type=int, default=None)

    cond = sub.add_parser("condition", help="minimal mu meeting the adaptive power condition")
    cond.add_argument("--n0", type=int, required=True)
    cond.add_argument("--n1", type=int, required=True)
    cond.add_argument("--alpha", type=float, default=0.05)
    cond.add_argument("--beta", type=float, default=0.05)
    cond.add_argument("--grid", default="0.25:8:0.25", help="start:stop:step for the mu grid")
    cond.add_argument("--draws", type=int, default=100_000)
    cond.add_argument("--seed", type=int, default=0)

    serve = sub.add_parser("serve", help="run the live session service")
    # flags win over SEQNULL_* environment variables
    serve.add_argument("--host", default=os.environ.get("SEQNULL_HOST", "127.0.0.1"))
    serve.add_argument("--port", type=int, default=int(os.environ.get("SEQNULL_PORT", "8000")))
    serve.add_argument(
        "--data-dir", default=os.environ.get("SEQNULL_DATA_DIR", "./seqnull-sessions")
    )
    serve.add_argument("--alpha", type=float, default=float(os.environ.get("SEQNULL_ALPHA", "0.05")))

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        path = run_figure(args.figure, args.out, seed=args.seed, reps=args.reps)
        print(path)
        return 0
    if args.command == "power":
        with open(args.scenario) as fh:
            scenario = scenario_from_json(json.load(fh))
        with open(args.test) as fh:
            config = TestConfig.from_json(json.load(fh))
        est = estimate_power(scenario, config, reps=args.reps, seed=args.seed)
        print(json.dumps(est.__dict__))
        return 0
    if args.command == "condition":
        start, stop, step = (float(v) for v in args.grid.split(":"))
        count = int(round((stop - start) / step)) + 1
        grid = tuple(round(start + i * step, 10) for i in range(count))
        inputs = PowerConditionInputs(
            n0=args.n0,
            n1=args.n1,
            alpha=args.alpha,
            beta=args.beta,
            mu_grid=grid,
            mc_draws=args.draws,
            seed=args.seed,
        )
        mu = amt_sufficient_mu(inputs)
        print(json.dumps({"mu": mu if mu != float("inf") else "above grid"}))
        return 0
    if args.command == "serve":
        import uvicorn

        from .service import build_app

        app = build_app(args.data_dir, default_alpha=args.alpha)
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
        return 0
    return 1


if __name__ == "__main__":
    sys.exit(main())
