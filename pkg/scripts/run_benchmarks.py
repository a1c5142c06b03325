"""Run the simulation studies with the published replication counts.

Examples
--------
    python3 scripts/run_benchmarks.py michalewicz-p2 --reps 5
    python3 scripts/run_benchmarks.py all --json results/
"""

import argparse
import logging
import sys
from pathlib import Path

from optkernel.bench import ExperimentSpec, run_experiment
from optkernel.model import dumps

PRESETS = {
    "michalewicz-p2": dict(function="michalewicz", d=6, p=2, n_train=200, n_test=3481, reps=50),
    "michalewicz-p6": dict(function="michalewicz", d=10, p=6, n_train=300, n_test=3481, reps=50),
    "borehole": dict(function="borehole", d=20, p=8, n_train=200, n_test=1000, reps=50),
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("preset", choices=sorted(PRESETS) + ["all"])
    ap.add_argument("--reps", type=int, default=None, help="override the replication count")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", type=Path, default=None, help="directory for per-preset reports")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)

    names = sorted(PRESETS) if args.preset == "all" else [args.preset]
    for name in names:
        kw = dict(PRESETS[name], seed=args.seed)
        if args.reps is not None:
            kw["reps"] = args.reps
        report = run_experiment(ExperimentSpec(**kw))
        print(f"# {name}: median RMSE {report.rmse_median:.4f}, {report.seconds:.0f}s")
        print(report.table())
        if args.json is not None:
            args.json.mkdir(parents=True, exist_ok=True)
            (args.json / f"{name}.json").write_text(dumps(report.to_dict(), indent=1))


if __name__ == "__main__":
    main()
