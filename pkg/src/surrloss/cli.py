"""Command-line interface.

Subcommands: train, predict, cv, experiment {robust,ranking,histogram},
check {fisher,comparison,equivalence,consistency}.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 failed check.

CSV conventions (UTF-8, comma separator, '.' decimal, header row):
inputs are columns x0..xd; scalar targets a column y; label targets a column
y; rating profiles columns r0..r{M-1}; histograms columns p0..p{d-1}.
Predicted rankings are written as columns rank0..rank{M-1} (rank of item i,
1 = top).
"""

import argparse
import csv
import json
import sys

import numpy as np

from . import __version__, decoders, experiments, kernels, losses, model_selection, oracle, surrogate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_CHECK_FAILED = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _float_list(text):
    return tuple(float(t) for t in text.split(",") if t.strip())


def _int_list(text):
    return tuple(int(t) for t in text.split(",") if t.strip())


# ---------------------------------------------------------------------------
# CSV I/O

def _numbered(header, prefix):
    cols = [(int(name[len(prefix):]), i) for i, name in enumerate(header)
            if name.startswith(prefix) and name[len(prefix):].isdigit()]
    return [i for _, i in sorted(cols)]


def read_dataset(path, kind):
    """Returns (X, Y); Y is None when the file only carries inputs."""
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        rows = [row for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: empty csv")
    header, data = rows[0], rows[1:]
    x_cols = _numbered(header, "x")
    if not x_cols:
        raise ValueError(f"{path}: no x0..xd input columns")
    X = np.array([[float(row[i]) for i in x_cols] for row in data])
    if kind == "scalar" or kind == "label":
        if "y" not in header:
            return X, None
        yc = header.index("y")
        if kind == "scalar":
            return X, np.array([float(row[yc]) for row in data])
        return X, [row[yc] for row in data]
    prefix = "r" if kind == "ratings" else "p"
    cols = _numbered(header, prefix)
    if not cols:
        return X, None
    Y = np.array([[float(row[i]) for i in cols] for row in data])
    return X, Y


def write_predictions(path, preds, kind):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        if kind in ("scalar", "label"):
            writer.writerow(["y"])
            for p in preds:
                writer.writerow([p])
        elif kind == "simplex":
            preds = np.asarray(preds, dtype=float)
            writer.writerow([f"p{j}" for j in range(preds.shape[1])])
            writer.writerows(preds.tolist())
        else:  # rankings
            preds = np.asarray(preds, dtype=int)
            writer.writerow([f"rank{j}" for j in range(preds.shape[1])])
            writer.writerows(preds.tolist())


def _report(out, payload):
    payload = {"surrloss_version": __version__, **payload}
    text = json.dumps(payload, indent=2)
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    else:
        print(text)


def _write_curve_csv(path, results):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["n", "method", "mean", "std"])
        for r in results:
            writer.writerow([r.n, r.method, r.metric_mean, r.metric_std])


# ---------------------------------------------------------------------------
# Subcommands

def _kernel_from_args(args):
    if args.kernel == "linear":
        return kernels.linear()
    return kernels.gaussian(args.sigma)


def cmd_train(args):
    X, Y = read_dataset(args.data, args.kind)
    if Y is None:
        raise ValueError("training csv has no target columns")
    model = surrogate.fit(X, Y, _kernel_from_args(args), args.lam)
    surrogate.save_model(model, args.out, args.kind)
    print(f"saved model for {model.n} training points to {args.out}")
    return EXIT_OK


def _loss_from_args(args):
    if args.loss == "cauchy":
        return losses.Cauchy(args.gamma)
    if args.loss == "squared":
        return losses.SquaredError()
    if args.loss == "absolute":
        return losses.AbsoluteError()
    if args.loss == "zero_one":
        return losses.ZeroOne()
    if args.loss == "hellinger":
        return losses.SquaredHellinger()
    if args.loss == "rank":
        return losses.RankLoss()
    raise ValueError(f"unknown loss {args.loss!r}")


_DEFAULT_LOSS = {"scalar": "cauchy", "label": "zero_one",
                 "simplex": "hellinger", "ratings": "rank"}


def _decoder_from_outputs(Y, kind, args):
    if kind == "scalar":
        return decoders.ScalarGrid(bound=args.bound, grid_points=args.grid_points,
                                   refine_iters=args.refine_iters)
    if kind == "label":
        return decoders.Exhaustive(sorted(set(Y)))
    if kind == "simplex":
        return decoders.SimplexHellinger()
    return decoders.RankingFas(items=np.asarray(Y).shape[1])


def cmd_predict(args):
    model, kind = surrogate.load_model(args.model)
    X, _ = read_dataset(args.data, kind)
    if args.loss is None:
        args.loss = _DEFAULT_LOSS[kind]
    loss = _loss_from_args(args)
    decoder = _decoder_from_outputs(model.Y, kind, args)
    preds = decoders.predict_batch(model, decoder, loss, X)
    write_predictions(args.out, preds, kind)
    print(f"wrote {len(X)} predictions to {args.out}")
    return EXIT_OK


def cmd_cv(args):
    X, Y = read_dataset(args.data, args.kind)
    if Y is None:
        raise ValueError("cv csv has no target columns")
    if args.loss is None:
        args.loss = _DEFAULT_LOSS[args.kind]
    loss = _loss_from_args(args)
    scoring = losses.AbsoluteError() if args.kind == "scalar" else loss
    if args.kind == "ratings":
        scoring = losses.RankLoss(normalize=True)
    kernel_grid = (kernels.linear(),) if args.kernel == "linear" else tuple(
        kernels.gaussian(s) for s in args.sigmas)
    plan = model_selection.CvPlan(folds=args.folds, seed=args.seed,
                                  lambda_grid=args.lambdas,
                                  kernel_grid=kernel_grid, scoring=scoring)
    decoder = _decoder_from_outputs(Y, args.kind, args)
    report = model_selection.cross_validate(X, Y, plan, decoder, loss)
    rows = [{"kernel": _kernel_desc(r.kernel), "lambda": r.lam,
             "mean": r.mean, "std": r.std} for r in report.rows]
    sel = report.selected
    _report(args.out, {
        "command": "cv",
        "config": {"kind": args.kind, "folds": args.folds, "seed": args.seed,
                   "loss": args.loss, "lambdas": list(args.lambdas)},
        "rows": rows,
        "selected": {"kernel": _kernel_desc(sel.kernel), "lambda": sel.lam,
                     "mean": sel.mean, "std": sel.std},
    })
    return EXIT_OK


def _kernel_desc(spec):
    if spec.kind == "gaussian":
        return {"kind": "gaussian", "sigma": spec.sigma}
    return {"kind": spec.kind}


def _result_json(results):
    return [{"method": r.method, "n": r.n, "mean": r.metric_mean,
             "std": r.metric_std, "seeds": r.seeds, "wall_time_s": r.wall_time,
             "per_seed": r.per_seed} for r in results]


def cmd_experiment(args):
    if args.which == "robust":
        results = experiments.run_robust_experiment(
            n_grid=args.n_grid, repetitions=args.reps, seed0=args.seed)
        metadata = {"metric": "mean |f(x) - sin(6 pi x)| on a uniform 1000-point grid",
                    "cv": {"sigmas": list(experiments.ROBUST_SIGMAS),
                           "lambdas": list(experiments.ROBUST_LAMBDAS),
                           "gammas": list(experiments.ROBUST_GAMMAS)}}
    elif args.which == "ranking":
        results = experiments.run_ranking_experiment(
            items=args.items, repetitions=args.reps, seed0=args.seed)
        metadata = {"metric": "mean normalized rank loss on held-out profiles"}
    else:
        results = experiments.run_histogram_experiment(
            dim=args.dim, repetitions=args.reps, seed0=args.seed)
        metadata = {"metric": "mean squared Hellinger (dH) and Gaussian-kernel (dG) test losses"}
    payload = {
        "command": f"experiment {args.which}",
        "config": {"seed": args.seed, "reps": args.reps},
        "metadata": metadata,
        "results": _result_json(results),
    }
    _report(args.out, payload)
    if args.curve:
        _write_curve_csv(args.curve, results)
    return EXIT_OK


def cmd_check(args):
    if args.which == "fisher":
        rep = oracle.fisher_battery(trials_per_family=args.trials, seed=args.seed)
        ok = rep["max_abs_gap"] <= 1e-10
    elif args.which == "comparison":
        rep = oracle.comparison_battery(trials=args.trials, seed=args.seed)
        ok = rep["violations"] == 0
    elif args.which == "equivalence":
        rep = oracle.equivalence_battery(trials=args.trials, seed=args.seed)
        ok = rep["mismatches"] == 0
    else:  # consistency
        problem = oracle.default_trend_problem()
        loss = losses.ZeroOne(problem.ys)
        rep = oracle.check_consistency_trend(problem, loss, seeds=args.trials,
                                             seed0=args.seed)
        rep = {"n_grid": rep["n_grid"], "medians": rep["medians"]}
        ok = oracle.trend_non_increasing(rep["medians"])
    _report(args.out, {"command": f"check {args.which}",
                       "config": {"trials": args.trials, "seed": args.seed},
                       "result": rep, "pass": bool(ok)})
    return EXIT_OK if ok else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------

def build_parser():
    parser = _Parser(prog="surrloss", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a model from csv data")
    p.add_argument("--in", dest="data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--kind", choices=surrogate.OUTPUT_KINDS, required=True)
    p.add_argument("--kernel", choices=("gaussian", "linear"), default="gaussian")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=1e-2)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="decode predictions for csv queries")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--loss", choices=("cauchy", "squared", "absolute", "zero_one",
                                      "hellinger", "rank"), default=None)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--bound", type=float, default=3.0)
    p.add_argument("--grid-points", type=int, default=512)
    p.add_argument("--refine-iters", type=int, default=40)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("cv", help="cross-validate a hyperparameter grid")
    p.add_argument("--in", dest="data", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--kind", choices=surrogate.OUTPUT_KINDS, required=True)
    p.add_argument("--kernel", choices=("gaussian", "linear"), default="gaussian")
    p.add_argument("--sigmas", type=_float_list, default=(0.1, 1.0, 10.0))
    p.add_argument("--lambdas", type=_float_list, default=(1e-4, 1e-2, 1.0))
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--loss", default=None)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--bound", type=float, default=3.0)
    p.add_argument("--grid-points", type=int, default=512)
    p.add_argument("--refine-iters", type=int, default=40)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("experiment", help="run a synthetic experiment")
    p.add_argument("which", choices=("robust", "ranking", "histogram"))
    p.add_argument("--out", default=None)
    p.add_argument("--curve", default=None, help="csv path for the learning curve")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--n-grid", type=_int_list, default=(50, 100, 200, 500))
    p.add_argument("--items", type=int, default=8)
    p.add_argument("--dim", type=int, default=8)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("check", help="run a theory check battery")
    p.add_argument("which", choices=("fisher", "comparison", "equivalence", "consistency"))
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=None)
    p.set_defaults(func=cmd_check)
    return parser


_CHECK_DEFAULT_TRIALS = {"fisher": 50, "comparison": 1000,
                         "equivalence": 100, "consistency": 20}


def _apply_config(argv, parser):
    if "--config" in argv:
        i = argv.index("--config")
        try:
            path = argv[i + 1]
        except IndexError:
            parser.error("--config needs a path")
        with open(path, encoding="utf-8") as f:
            defaults = json.load(f)
        argv = argv[:i] + argv[i + 2:]
        parser.set_defaults(**defaults)
    return argv


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(argv, parser)
        args = parser.parse_args(argv)
        if getattr(args, "trials", 0) is None:
            args.trials = _CHECK_DEFAULT_TRIALS[args.which]
        return args.func(args)
    except SystemExit as e:
        return e.code if e.code is not None else EXIT_OK
    except np.linalg.LinAlgError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except RuntimeError as e:
        if isinstance(e.__cause__, np.linalg.LinAlgError):
            print(f"numerical failure: {e}", file=sys.stderr)
            return EXIT_NUMERICAL
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
