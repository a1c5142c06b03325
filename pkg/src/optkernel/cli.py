"""Command-line front end: ``optkernel {fit,predict,cv,bench}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from .bench import ExperimentSpec, run_experiment
from .datasets import load_csv, read_table
from .errors import NumericalSingularityError, OptKernelError
from .gp import DEFAULT_ETA_GRID, fit_gp, predict, select_eta
from .kernels import ThetaGrid
from .model import FittedModel, dumps
from .selector import INIT_BEST_SINGLE, INIT_RANDOM, SelectorConfig
from .stagewise import Heredity, StageConfig
from .weights import WeightConfig

log = logging.getLogger("optkernel")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

THREADS_ENV = "OPTKERNEL_THREADS"
N_TEST_DEFAULT = {"michalewicz": 3481, "borehole": 1000}


class UsageError(Exception):
    """Bad flag or file detected after argument parsing."""


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _float_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals or any(not (v > 0 and np.isfinite(v)) for v in vals):
        raise argparse.ArgumentTypeError(f"values must be positive and finite, got {text!r}")
    return vals


def _positive_float(text: str) -> float:
    v = float(text)
    if not (v > 0 and np.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return v


def _add_algorithm_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("algorithm")
    g.add_argument("--tol", type=_positive_float, default=0.005,
                   help="relative change in Q that stops selection and staging")
    g.add_argument("--del", dest="del_threshold", type=float, default=0.05,
                   help="delete support kernels with weight below this")
    g.add_argument("--no-delete", action="store_true", help="skip the delete step")
    g.add_argument("--max-iter", type=int, default=1000, help="max kernel additions per stage")
    g.add_argument("--max-iter0", type=int, default=1000, help="max weight-update sweeps")
    g.add_argument("--delta", type=float, default=1.0, help="exponent of the multiplicative update")
    g.add_argument("--max-dim", type=int, default=4, help="largest kernel dimension")
    g.add_argument("--heredity", choices=[h.value for h in Heredity], default="strong",
                   help="candidate expansion rule")
    g.add_argument("--theta-grid", type=_float_list, default=ThetaGrid.default().values,
                   help="comma-separated inverse squared lengthscales")
    g.add_argument("--init", choices=[INIT_RANDOM, INIT_BEST_SINGLE], default=INIT_RANDOM,
                   help="how the first kernel is chosen")
    g.add_argument("--seed", type=_nonneg_int, default=0, help="random seed")
    g.add_argument("--threads", type=int, default=default_threads(),
                   help=f"worker threads for the eta search (env {THREADS_ENV})")


def _add_eta_flags(p: argparse.ArgumentParser, fixed: bool = True) -> None:
    p.add_argument("--eta-grid", type=_float_list, default=DEFAULT_ETA_GRID,
                   help="comma-separated nuggets searched by leave-one-out error")
    if fixed:
        p.add_argument("--eta", type=_positive_float, default=None,
                       help="fixed nugget; implies --no-cv")
        p.add_argument("--no-cv", action="store_true",
                       help="skip the nugget search (uses --eta, else 0.01)")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="optkernel", description=__doc__, formatter_class=fmt)
    parser.add_argument("-q", "--quiet", action="store_true", help="suppress progress on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="learn a kernel from a CSV file", formatter_class=fmt)
    p.add_argument("data", help="training CSV with a header row")
    p.add_argument("--response", required=True, help="name of the response column")
    p.add_argument("-o", "--model", default="model.json", help="where to write the fitted model")
    p.add_argument("--trace", action="store_true", help="dump per-stage selection traces to stderr")
    _add_eta_flags(p)
    _add_algorithm_flags(p)

    p = sub.add_parser("predict", help="predict with a saved model", formatter_class=fmt)
    p.add_argument("model", help="model file written by fit")
    p.add_argument("query", help="CSV of query points")
    p.add_argument("-o", "--output", default="-", help="output CSV, '-' for stdout")

    p = sub.add_parser("cv", help="leave-one-out error for each nugget", formatter_class=fmt)
    p.add_argument("data", help="training CSV with a header row")
    p.add_argument("--response", required=True, help="name of the response column")
    p.add_argument("--trace", action="store_true", help="dump per-stage selection traces to stderr")
    _add_eta_flags(p, fixed=False)
    _add_algorithm_flags(p)

    p = sub.add_parser("bench", help="run a simulation experiment", formatter_class=fmt)
    p.add_argument("--function", choices=["michalewicz", "borehole", "csv"], default="michalewicz",
                   help="test function")
    p.add_argument("--p", type=int, default=2, help="active dimensions (borehole: 8)")
    p.add_argument("--d", type=int, default=6, help="total input dimension")
    p.add_argument("--n", type=int, default=200, help="training size")
    p.add_argument("--n-test", type=int, default=None,
                   help="test size (michalewicz 3481, borehole 1000)")
    p.add_argument("--reps", type=int, default=5, help="replications")
    p.add_argument("--maximin-iters", type=int, default=2000, help="swap proposals per training design")
    p.add_argument("--data", default=None, help="CSV for --function csv")
    p.add_argument("--response", default=None, help="response column for --function csv")
    p.add_argument("--json", default=None, help="also write the full report here")
    _add_eta_flags(p)
    _add_algorithm_flags(p)
    return parser


def stage_config(args) -> StageConfig:
    return StageConfig(
        max_dim=args.max_dim,
        heredity=Heredity(args.heredity),
        selector=SelectorConfig(
            del_threshold=args.del_threshold,
            tol=args.tol,
            max_iter=args.max_iter,
            seed=args.seed,
            init=args.init,
            delete=not args.no_delete,
        ),
        weights=WeightConfig(delta=args.delta, tol=args.tol, max_iter=args.max_iter0),
        theta_grid=ThetaGrid(args.theta_grid),
    )


def _fixed_eta(args) -> float | None:
    if args.eta is not None:
        return args.eta
    if args.no_cv:
        return SelectorConfig().eta
    return None


def _emit_trace(stages) -> None:
    print(json.dumps([s.to_dict() for s in stages], indent=1), file=sys.stderr)


def _load(path, response):
    try:
        return load_csv(path, response)
    except OptKernelError as exc:
        raise UsageError(str(exc)) from None


def cmd_fit(args) -> int:
    X, y, names = _load(args.data, args.response)
    if X.shape[0] < 3:
        raise UsageError(f"{args.data}: need at least 3 rows, got {X.shape[0]}")
    cfg = stage_config(args)
    res = fit_gp(X, y, cfg, args.eta_grid, eta=_fixed_eta(args), threads=args.threads,
                 input_names=names, response_name=args.response)
    model = res.model
    last = res.stages[-1].selection
    model.metadata.update({"loo": res.loo, "certificate": last.certificate})
    model.save(args.model)
    log.info("wrote %s", args.model)
    if args.trace:
        _emit_trace(res.stages)

    out = sys.stdout
    print("kernel\tdims\ttheta\tweight", file=out)
    for i, (s, w) in enumerate(model.design.items(), start=1):
        dims = ",".join(names[j - 1] for j in s.dims)
        print(f"{i}\t{dims}\t{s.theta:g}\t{w:.6f}", file=out)
    active = [names[j - 1] for j in sorted(model.active_variables())]
    print(f"active\t{','.join(active)}", file=out)
    print(f"q\t{model.q_value:.10g}", file=out)
    print(f"eta\t{model.eta:g}", file=out)
    print(f"loo\t{res.loo:.10g}", file=out)
    status = "ok" if last.certificate else "not-met"
    print(f"certificate\t{status}\t(min phi {last.min_phi:.3g}, eps {last.cert_eps:.3g})", file=out)
    return EXIT_OK


def _query_matrix(model: FittedModel, names, data, path):
    if model.input_names and set(model.input_names) <= set(names):
        idx = [names.index(c) for c in model.input_names]
        return data[:, idx]
    if data.shape[1] != model.d:
        raise UsageError(f"{path}: model expects {model.d} input columns, file has {data.shape[1]}")
    return data


def cmd_predict(args) -> int:
    try:
        model = FittedModel.load(args.model)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise UsageError(f"{args.model}: cannot read model ({exc})") from None
    except OptKernelError as exc:
        raise UsageError(f"{args.model}: {exc}") from None
    try:
        names, data = read_table(args.query, allow_empty=True)
    except OptKernelError as exc:
        raise UsageError(str(exc)) from None
    Xq = _query_matrix(model, names, data, args.query)
    if Xq.shape[0]:
        pred = predict(model, Xq)
        mean, sd = pred.mean, pred.sd
        if pred.extrapolated.any():
            log.warning("%d query rows lie outside the training box", int(pred.extrapolated.sum()))
    else:
        mean = sd = np.empty(0)
    fh = sys.stdout if args.output == "-" else open(args.output, "w", newline="")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names + ["mean", "sd"])
        for row, m, s in zip(data, mean, sd):
            w.writerow([repr(float(v)) for v in row] + [repr(float(m)), repr(float(s))])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_cv(args) -> int:
    X, y, names = _load(args.data, args.response)
    if X.shape[0] < 3:
        raise UsageError(f"{args.data}: need at least 3 rows, got {X.shape[0]}")
    from .gp import InputScaling

    scaling = InputScaling.fit(X)
    yc = y - y.mean()
    search = select_eta(scaling.apply(X), yc, args.eta_grid, stage_config(args), threads=args.threads)
    if args.trace:
        for f in search.fits:
            if not f.failed:
                _emit_trace(f.stages)
    print("eta\tloo\tbest")
    for eta, loo in search.curve:
        mark = "*" if eta == search.best_eta else ""
        val = "failed" if loo is None else f"{loo:.10g}"
        print(f"{eta:g}\t{val}\t{mark}")
    return EXIT_OK


def cmd_bench(args) -> int:
    n_test = args.n_test if args.n_test is not None else N_TEST_DEFAULT.get(args.function)
    if n_test is None:
        raise UsageError("--n-test is required with --function csv")
    try:
        spec = ExperimentSpec(
            function=args.function, d=args.d, p=args.p, n_train=args.n, n_test=n_test,
            reps=args.reps, seed=args.seed, stage=stage_config(args), eta_grid=args.eta_grid,
            eta=_fixed_eta(args), maximin_iters=args.maximin_iters, threads=args.threads,
            data_path=args.data, response=args.response,
        )
    except OptKernelError as exc:
        raise UsageError(str(exc)) from None
    report = run_experiment(spec)
    print("rep\tRMSE\tFP\tFN\teta\tkernels\tseconds")
    for r in report.replications:
        if r.failed:
            print(f"{r.rep}\tfailed\t\t\t\t\t{r.seconds:.1f}\t# {r.error}")
        else:
            print(f"{r.rep}\t{r.rmse:.4f}\t{r.fp}\t{r.fn}\t{r.eta:g}\t{r.n_kernels}\t{r.seconds:.1f}")
    print()
    print(report.table())
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(dumps(report.to_dict(), indent=1))
    if not report.ok:
        log.error("every replication failed")
        return EXIT_NUMERICAL
    return EXIT_OK


COMMANDS = {"fit": cmd_fit, "predict": cmd_predict, "cv": cmd_cv, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"optkernel {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalSingularityError as exc:
        print(f"optkernel {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OptKernelError as exc:
        # configuration errors raised from dataclass validation
        print(f"optkernel {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"optkernel {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
