"""Command-line surface: fit/select, screen, simulate, rolling prediction.

Exit codes: 0 success, 2 data or flag error, 3 convergence failure. On
failure a single machine-readable JSON line is written to stderr. All
reports embed the flag set and seed and carry ``schema_version`` 1.

CSV dialect: comma separated, first row is the header, UTF-8, decimal
point, scientific notation accepted. Missing or non-numeric cells and
ragged rows are rejected with their exact row and column; nothing is
imputed.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadDimensionError,
    BadLabelError,
    DataError,
    DegenerateInputError,
    FarmSelectError,
    LengthMismatchError,
    NoConvergenceError,
    NonFiniteObjectiveError,
)
from .pipeline import farm_screen, farm_select
from .simbench import DesignSpec, MethodSpec, run_replications

__all__ = ["DatasetFile", "RollingForecastReport", "load_dataset", "rolling_forecast", "main"]

EXIT_OK = 0
EXIT_DATA = 2
EXIT_CONVERGENCE = 3

_DATA_ERRORS = (
    DataError,
    BadDimensionError,
    BadLabelError,
    LengthMismatchError,
    DegenerateInputError,
)
_CONVERGENCE_ERRORS = (NoConvergenceError, NonFiniteObjectiveError)


@dataclass(frozen=True)
class DatasetFile:
    """A parsed rectangular CSV: response vector plus feature matrix."""

    path: str
    header: tuple
    response_column: str
    feature_columns: tuple
    X: np.ndarray
    y: np.ndarray


@dataclass(frozen=True)
class RollingForecastReport:
    """One-step-ahead rolling predictions and their out-of-sample R^2.

    ``predictions`` rows are (t, y_t, yhat_t, ybar_t, model_size_t) with t
    1-based and ybar_t the trailing-window mean (the naive predictor);
    ``r2_oos = 1 - sum (y - yhat)^2 / sum (y - ybar)^2``.
    """

    window: int
    horizon: int
    predictions: tuple
    r2_oos: float

    def to_dict(self) -> dict:
        return {
            "window": self.window,
            "horizon": self.horizon,
            "predictions": [
                {"t": int(t), "y": y, "yhat": yh, "ybar": yb, "model_size": int(ms)}
                for (t, y, yh, yb, ms) in self.predictions
            ],
            "r2_oos": self.r2_oos,
        }


def load_dataset(path, response: str) -> DatasetFile:
    """Parse a CSV file, rejecting ragged rows and non-numeric cells."""
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path} is empty: no header row")
        header = tuple(h.strip() for h in header)
        if len(set(header)) != len(header):
            raise DataError(f"{path} has duplicate column names")
        if response not in header:
            raise DataError(f"response column {response!r} not in header {list(header)}")
        rows = []
        for i, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise DataError(
                    f"row {i} has {len(row)} cells, expected {len(header)}"
                )
            vals = []
            for name, cell in zip(header, row):
                cell = cell.strip()
                if cell == "":
                    raise DataError(f"missing value at row {i}, column {name!r}")
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"invalid number {cell!r} at row {i}, column {name!r}"
                    )
            rows.append(vals)
    if not rows:
        raise DataError(f"{path} has a header but no data rows")
    data = np.asarray(rows, dtype=np.float64)
    ri = header.index(response)
    features = tuple(h for h in header if h != response)
    mask = np.arange(len(header)) != ri
    return DatasetFile(
        path=str(path),
        header=header,
        response_column=response,
        feature_columns=features,
        X=np.ascontiguousarray(data[:, mask]),
        y=np.ascontiguousarray(data[:, ri]),
    )


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def _num_factors_arg(text: str):
    return "auto" if text == "auto" else int(text)


def _lambda_arg(text: str):
    return "cv" if text == "cv" else float(text)


def _write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)


def _flag_dict(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def default_parallelism() -> int:
    env = os.environ.get("FARMSELECT_THREADS", "")
    if env.strip():
        try:
            return max(1, int(env))
        except ValueError:
            raise DataError(f"FARMSELECT_THREADS={env!r} is not an integer")
    return os.cpu_count() or 1


# ---------------------------------------------------------------- select


def cmd_select(args) -> int:
    ds = load_dataset(args.data, args.response)
    res = farm_select(
        ds.X,
        ds.y,
        family=args.family,
        num_factors=_num_factors_arg(args.num_factors),
        lam=_lambda_arg(args.lam),
        n_folds=args.folds,
        seed=args.seed,
        n_lambdas=args.n_lambdas,
        cv_contiguous=args.cv_contiguous,
    )
    report = {
        "schema_version": 1,
        "command": "select",
        "flags": _flag_dict(args),
        "seed": args.seed,
        "n": int(ds.X.shape[0]),
        "p": int(ds.X.shape[1]),
        "family": args.family,
        "num_factors": res.K_used,
        "eigenvalues": [float(v) for v in res.factor_fit.eigenvalues],
        "lambda_path": [float(v) for v in res.path.lambdas],
        "cv_scores": None
        if res.cv_scores is None
        else [float(v) for v in res.cv_scores],
        "lambda_chosen": res.lambda_chosen,
        "selected": [ds.feature_columns[j] for j in res.selected],
        "intercept": res.fit.intercept,
        "coefficients": {
            ds.feature_columns[j]: float(res.beta[j]) for j in res.selected
        },
        "factor_coefficients": [float(v) for v in res.gamma],
        "kkt_max_violation": res.fit.kkt_max_violation,
        "converged": res.fit.converged,
    }
    _write_json(args.out, report)
    if not res.fit.converged:
        return _fail(EXIT_CONVERGENCE, "convergence", "selected fit did not converge")
    return EXIT_OK


# ---------------------------------------------------------------- screen


def cmd_screen(args) -> int:
    ds = load_dataset(args.data, args.response)
    res = farm_screen(
        ds.X,
        ds.y,
        family=args.family,
        num_factors=_num_factors_arg(args.num_factors),
        top_m=args.top,
    )
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["rank", "variable", "score"])
        for rank, j in enumerate(res.ranking, start=1):
            w.writerow([rank, ds.feature_columns[j], repr(float(res.scores[j]))])
    return EXIT_OK


# ---------------------------------------------------------------- simulate


def _parse_sweep(text: str) -> np.ndarray:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise DataError(f"sweep must be start:stop:step, got {text!r}")
        start, stop, step = (float(v) for v in parts)
        count = int(round((stop - start) / step)) + 1
        return np.asarray([start + i * step for i in range(count)])
    return np.asarray([float(v) for v in text.split(",")])


def cmd_simulate(args) -> int:
    method = MethodSpec(
        name=args.method,
        num_factors=_num_factors_arg(args.num_factors),
        n_folds=args.folds,
        n_lambdas=args.n_lambdas,
    )
    parallelism = args.parallelism or default_parallelism()

    if args.rho_sweep:
        if args.design != "equicorr":
            raise DataError("--rho-sweep is only meaningful for the equicorr design")
        rows = []
        for rho in _parse_sweep(args.rho_sweep):
            design = DesignSpec(
                kind="equicorr", n=args.n, p=args.p, rho=float(rho), s=args.s
            )
            rep = run_replications(
                design, method, args.reps, args.seed, parallelism=parallelism
            )
            rows.append(
                (
                    float(rho),
                    rep.avg_model_size,
                    rep.avg_first_false_size,
                    rep.selection_consistency_rate,
                )
            )
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(
                ["rho", "avg_model_size", "avg_first_false_size", "consistency_rate"]
            )
            for row in rows:
                w.writerow([repr(v) for v in row])
        return EXIT_OK

    design = DesignSpec(kind=args.design, n=args.n, p=args.p, rho=args.rho, s=args.s)
    report = run_replications(
        design, method, args.reps, args.seed, parallelism=parallelism
    )
    payload = report.to_dict()
    payload.update({"command": "simulate", "flags": _flag_dict(args), "seed": args.seed})
    _write_json(args.out, payload)
    if args.csv:
        report.write_csv(args.csv)
    return EXIT_OK


# ---------------------------------------------------------------- predict-rolling


def rolling_forecast(
    X,
    y,
    window: int,
    method: str = "farmselect",
    num_factors="auto",
    lam="cv",
    n_folds: int = 10,
    seed: int = 0,
) -> RollingForecastReport:
    """One-step-ahead rolling-window evaluation on a time-ordered dataset.

    For each t past the window, refit on the trailing ``window`` rows,
    predict y_t, and compare against the trailing-window mean as the naive
    benchmark.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    n = X.shape[0]
    if window < 2 or n <= window:
        raise DataError(
            f"need at least window+1 = {window + 1} rows in time order, got {n}"
        )
    K = 0 if method == "lasso" else num_factors
    preds = []
    for t in range(window, n):
        Xtr, ytr = X[t - window : t], y[t - window : t]
        res = farm_select(
            Xtr, ytr, family="linear", num_factors=K, lam=lam,
            n_folds=n_folds, seed=seed,
        )
        yhat = float(res.predict(X[t : t + 1])[0])
        ybar = float(ytr.mean())
        preds.append((t + 1, float(y[t]), yhat, ybar, int(res.selected.size)))
    resid = np.asarray([(p[1] - p[2]) ** 2 for p in preds])
    base = np.asarray([(p[1] - p[3]) ** 2 for p in preds])
    denom = float(base.sum())
    r2 = 1.0 - float(resid.sum()) / denom if denom > 0 else float("-inf")
    return RollingForecastReport(
        window=window, horizon=1, predictions=tuple(preds), r2_oos=r2
    )


def cmd_predict_rolling(args) -> int:
    ds = load_dataset(args.data, args.response)
    lam = "cv" if args.fixed_lambda is None else float(args.fixed_lambda)
    report = rolling_forecast(
        ds.X,
        ds.y,
        window=args.window,
        method=args.method,
        num_factors=_num_factors_arg(args.num_factors),
        lam=lam,
        n_folds=args.folds,
        seed=args.seed,
    )
    payload = report.to_dict()
    payload.update(
        {
            "schema_version": 1,
            "command": "predict-rolling",
            "flags": _flag_dict(args),
            "seed": args.seed,
        }
    )
    _write_json(args.out, payload)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="farmselect",
        description="Factor-adjusted regularized model selection toolkit",
    )
    sub = ap.add_subparsers(dest="subcommand", required=True)

    ps = sub.add_parser("select", help="fit and select on a CSV dataset")
    ps.add_argument("--data", required=True)
    ps.add_argument("--response", required=True)
    ps.add_argument("--family", choices=["linear", "logistic"], default="linear")
    ps.add_argument("--num-factors", default="auto")
    ps.add_argument("--lambda", dest="lam", default="cv")
    ps.add_argument("--folds", type=int, default=10)
    ps.add_argument("--n-lambdas", type=int, default=100)
    ps.add_argument("--cv-contiguous", action="store_true")
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--out", required=True)
    ps.set_defaults(func=cmd_select)

    pc = sub.add_parser("screen", help="rank covariates by decorrelated marginal fit")
    pc.add_argument("--data", required=True)
    pc.add_argument("--response", required=True)
    pc.add_argument("--family", choices=["linear", "logistic"], default="linear")
    pc.add_argument("--num-factors", default="auto")
    pc.add_argument("--top", type=int, required=True)
    pc.add_argument("--seed", type=int, default=0)
    pc.add_argument("--out", required=True)
    pc.set_defaults(func=cmd_screen)

    pm = sub.add_parser("simulate", help="run a seeded replication benchmark")
    pm.add_argument(
        "--design",
        choices=[
            "equicorr",
            "calibrated-linear",
            "logistic-factor",
            "logistic-equal",
            "logistic-indep",
        ],
        required=True,
    )
    pm.add_argument("--n", type=int, required=True)
    pm.add_argument("--p", type=int, required=True)
    pm.add_argument("--rho", type=float, default=0.0)
    pm.add_argument("--s", type=int, default=10)
    pm.add_argument("--reps", type=int, required=True)
    pm.add_argument("--seed", type=int, default=0)
    pm.add_argument("--method", choices=["farmselect", "lasso"], default="farmselect")
    pm.add_argument("--num-factors", default="auto")
    pm.add_argument("--folds", type=int, default=10)
    pm.add_argument("--n-lambdas", type=int, default=100)
    pm.add_argument("--rho-sweep", default="")
    pm.add_argument("--parallelism", type=int, default=0)
    pm.add_argument("--out", required=True)
    pm.add_argument("--csv", default="")
    pm.set_defaults(func=cmd_simulate)

    pr = sub.add_parser("predict-rolling", help="rolling one-step-ahead evaluation")
    pr.add_argument("--data", required=True)
    pr.add_argument("--response", required=True)
    pr.add_argument("--window", type=int, required=True)
    pr.add_argument("--method", choices=["farmselect", "lasso"], default="farmselect")
    pr.add_argument("--num-factors", default="auto")
    pr.add_argument("--fixed-lambda", default=None)
    pr.add_argument("--folds", type=int, default=10)
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--out", required=True)
    pr.set_defaults(func=cmd_predict_rolling)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _CONVERGENCE_ERRORS as exc:
        return _fail(EXIT_CONVERGENCE, type(exc).__name__, str(exc))
    except _DATA_ERRORS as exc:
        return _fail(EXIT_DATA, type(exc).__name__, str(exc))
    except FarmSelectError as exc:
        return _fail(EXIT_DATA, type(exc).__name__, str(exc))
    except ValueError as exc:
        return _fail(EXIT_DATA, "ValueError", str(exc))


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
