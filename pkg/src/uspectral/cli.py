"""Command-line front end.

Subcommands: ``acf`` (dependence-measure sequence), ``estimate`` (spectral
density with inference columns), ``simulate`` (model draws), ``mc`` (Monte
Carlo experiments), ``verify`` (decomposition identity and decay checks).

Exit codes: 0 success, 2 input/parse failure, 3 precondition violation,
4 internal invariant breach.  Output is written atomically (temp file in
the target directory, then rename); floats in CSV carry 17 significant
digits so a generic parser round-trips them exactly.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import warnings
from typing import List, Optional

import numpy as np

from .dependence import MeasureKind, TimeSeries, dependence_sequence
from .estimator import LagWindowSpectralEstimator
from .hoeffding import decompose, degenerate_decay_experiment, lag_model
from .simlab import SimulationModel, bias_experiment, clt_experiment, simulate
from .validation import (
    InputFormatError,
    InternalInvariantError,
    PreconditionError,
    TieValueWarning,
)
from .windows import WINDOWS

RESIDUAL_THRESHOLD = 1e-10


def _fmt(x) -> str:
    """17 significant digits: enough for exact float round-trip."""
    return format(float(x), ".17g")


def _write_atomic(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _read_series(path: str, column: Optional[int], skip_header: bool) -> np.ndarray:
    """One numeric value per line, or CSV when --column is given.

    A line containing commas is always treated as CSV (column 0 unless
    --column says otherwise).
    """
    if path == "-":
        text = sys.stdin.read()
    else:
        with open(path, "r") as handle:
            text = handle.read()
    values: List[float] = []
    col = 0 if column is None else column
    pending_header = skip_header
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if pending_header:
            pending_header = False
            continue
        field = line
        if "," in line or column is not None:
            parts = [p.strip() for p in line.split(",")]
            if col >= len(parts):
                raise InputFormatError(
                    f"{path}:{lineno}: column {col} out of range ({len(parts)} fields)"
                )
            field = parts[col]
        try:
            values.append(float(field))
        except ValueError:
            raise InputFormatError(f"{path}:{lineno}: not a number: {field!r}") from None
    if not values:
        raise InputFormatError(f"{path}: no numeric data found")
    return np.asarray(values, dtype=np.float64)


def _series_from_args(args) -> TimeSeries:
    values = _read_series(args.input, args.column, args.skip_header)
    series = TimeSeries.from_values(values, warn_ties=False)
    if series.tie_count > 0:
        print(
            f"warning: {series.tie_count} tied values; "
            "rank measures assume continuous marginals",
            file=sys.stderr,
        )
    return series


def _model_from_args(args) -> SimulationModel:
    return SimulationModel(name=args.model, phi=args.phi, marginal=args.marginal)


def _parse_bandwidth(text: str):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise PreconditionError(
            f'--bandwidth must be a positive number or "auto", got {text!r}'
        ) from None


def _csv(lines: List[str]) -> str:
    return "\n".join(lines) + "\n"


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"


def cmd_acf(args) -> int:
    series = _series_from_args(args)
    kind = MeasureKind.coerce(args.measure)
    seq = dependence_sequence(series, kind, args.max_lag)
    if args.format == "csv":
        lines = ["k,xi"]
        for k, xi in zip(seq.lags, seq.xi):
            lines.append(f"{int(k)},{_fmt(xi)}")
        _write_atomic(args.output, _csv(lines))
    else:
        payload = {
            "schema": 1,
            "measure": kind.value,
            "n": series.n,
            "max_lag": int(args.max_lag),
            "tie_count": series.tie_count,
            "k": [int(k) for k in seq.lags],
            "xi": seq.xi.tolist(),
        }
        _write_atomic(args.output, _json_text(payload))
    return 0


def cmd_estimate(args) -> int:
    series = _series_from_args(args)
    est = LagWindowSpectralEstimator(
        measure=args.measure,
        window=args.window,
        bandwidth=_parse_bandwidth(args.bandwidth),
        grid_size=args.grid,
        alpha=args.alpha,
        bias_correct=not args.no_bias_correct,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TieValueWarning)
        est.fit(series.values)
    # display-only floor: inference columns always come from the raw estimate
    shown_f = np.maximum(est.f_hat_, 0.0) if args.clip_negative else est.f_hat_
    columns = ["omega", "f_hat", "bias_hat", "se", "ci_low", "ci_high", "degenerate_flag"]
    if args.format == "csv":
        lines = [",".join(columns)]
        for j in range(est.omegas_.size):
            lines.append(
                ",".join(
                    [
                        _fmt(est.omegas_[j]),
                        _fmt(shown_f[j]),
                        _fmt(est.bias_hat_[j]),
                        _fmt(est.se_[j]),
                        _fmt(est.ci_low_[j]),
                        _fmt(est.ci_high_[j]),
                        str(int(est.degenerate_flag_[j])),
                    ]
                )
            )
        _write_atomic(args.output, _csv(lines))
    else:
        payload = {
            "schema": 1,
            "metadata": {
                "n": est.n_,
                "r_n": est.r_n_,
                "origin": est.bandwidth_.origin,
                "fallback": bool(est.bandwidth_.fallback),
                "window": est.window_.name,
                "d": est.window_.d,
                "C_w": est.window_.c_w,
                "w2_integral": est.window_.w2_integral,
                "measure": est.measure_.value,
                "alpha": est.result_.alpha,
                "bias_corrected": est.result_.bias_corrected,
            },
            "omega": est.omegas_.tolist(),
            "f_hat": shown_f.tolist(),
            "bias_hat": est.bias_hat_.tolist(),
            "se": est.se_.tolist(),
            "ci_low": est.ci_low_.tolist(),
            "ci_high": est.ci_high_.tolist(),
            "degenerate_flag": est.degenerate_flag_.astype(int).tolist(),
        }
        _write_atomic(args.output, _json_text(payload))
    return 0


def cmd_simulate(args) -> int:
    model = _model_from_args(args)
    series = simulate(model, args.n, args.seed)
    if args.format == "csv":
        lines = [_fmt(v) for v in series.values]
        _write_atomic(args.output, _csv(lines))
    else:
        payload = {
            "schema": 1,
            "model": {"name": model.name, "phi": model.phi, "marginal": model.marginal},
            "n": args.n,
            "seed": args.seed,
            "values": series.values.tolist(),
        }
        _write_atomic(args.output, _json_text(payload))
    return 0


def cmd_mc(args) -> int:
    model = _model_from_args(args)
    if args.experiment == "clt":
        omegas = args.omega if args.omega else [math.pi / 2]
        rule = _parse_bandwidth(args.bandwidth)
        report = clt_experiment(
            model,
            args.measure,
            args.window,
            rule,
            omegas,
            n=args.n,
            reps=args.reps,
            master_seed=args.seed,
            alpha=args.alpha,
            bias_correct=not args.no_bias_correct,
            n_jobs=args.jobs,
        )
        if args.format == "csv":
            keys = [
                "mean",
                "variance",
                "bias",
                "var_z",
                "var_z_flat",
                "ks_p",
                "skew_z",
                "ex_kurt_z",
                "coverage",
            ]
            lines = ["omega," + ",".join(keys)]
            for j, omega in enumerate(report.omegas):
                row = [_fmt(omega)] + [_fmt(report.summary[key][j]) for key in keys]
                lines.append(",".join(row))
            _write_atomic(args.output, _csv(lines))
        else:
            payload = {"schema": 1, "experiment": "clt"}
            payload.update(report.to_dict())
            _write_atomic(args.output, _json_text(payload))
        return 0

    if not args.bandwidth_list:
        raise PreconditionError("--bandwidth-list is required for the bias experiment")
    try:
        bandwidths = [float(part) for part in args.bandwidth_list.split(",") if part.strip()]
    except ValueError:
        raise PreconditionError(
            f"--bandwidth-list must be comma-separated numbers, got {args.bandwidth_list!r}"
        ) from None
    omega = args.omega[0] if args.omega else 0.0
    table = bias_experiment(
        model,
        args.measure,
        args.window,
        omega,
        n=args.n,
        reps=args.reps,
        bandwidth_list=bandwidths,
        master_seed=args.seed,
        n_jobs=args.jobs,
    )
    if args.format == "csv":
        lines = ["r_n,mean_f_hat,bias,mc_se"]
        for j in range(table.bandwidths.size):
            lines.append(
                ",".join(
                    [
                        _fmt(table.bandwidths[j]),
                        _fmt(table.mean_f_hat[j]),
                        _fmt(table.bias[j]),
                        _fmt(table.mc_se[j]),
                    ]
                )
            )
        lines.append(f"slope,{_fmt(table.slope)},,")
        _write_atomic(args.output, _csv(lines))
    else:
        payload = {"schema": 1, "experiment": "bias"}
        payload.update(table.to_dict())
        _write_atomic(args.output, _json_text(payload))
    return 0


def cmd_verify(args) -> int:
    if args.experiment == "identity":
        model = lag_model(args.model, args.measure, args.k, phi=args.phi, marginal=args.marginal)
        sim_model = _model_from_args(args)
        series = simulate(sim_model, args.n, args.seed)
        report = decompose(series.values, model, args.k)
        ok = abs(report.residual) <= RESIDUAL_THRESHOLD
        if args.format == "csv":
            lines = [
                "field,value",
                f"measure,{report.kind.value}",
                f"k,{report.k}",
                f"n,{report.n}",
                f"pairs_or_triples_size,{report.size}",
                f"xi_hat,{_fmt(report.xi_hat)}",
                f"xi_true,{_fmt(report.xi_true)}",
                f"total,{_fmt(report.total)}",
                f"linear_part,{_fmt(report.linear_part)}",
            ]
            for order in sorted(report.degenerate_parts):
                lines.append(f"degenerate_{order},{_fmt(report.degenerate_parts[order])}")
            lines.append(f"residual,{_fmt(report.residual)}")
            lines.append(f"ok,{int(ok)}")
            _write_atomic(args.output, _csv(lines))
        else:
            payload = {
                "schema": 1,
                "experiment": "identity",
                "model": {"name": args.model, "phi": args.phi, "marginal": args.marginal},
                "measure": report.kind.value,
                "k": report.k,
                "n": report.n,
                "size": report.size,
                "seed": args.seed,
                "xi_hat": report.xi_hat,
                "xi_true": report.xi_true,
                "total": report.total,
                "linear_part": report.linear_part,
                "degenerate_parts": {str(c): v for c, v in report.degenerate_parts.items()},
                "residual": report.residual,
                "threshold": RESIDUAL_THRESHOLD,
                "ok": ok,
            }
            _write_atomic(args.output, _json_text(payload))
        if not ok:
            raise InternalInvariantError(
                f"decomposition identity residual {report.residual:.3e} "
                f"exceeds {RESIDUAL_THRESHOLD:.1e}"
            )
        return 0

    model = lag_model(args.model, args.measure, args.k, phi=args.phi, marginal=args.marginal)
    sizes = [int(part) for part in args.sizes.split(",") if part.strip()]
    table = degenerate_decay_experiment(
        model, sizes, reps=args.reps, k=args.k, master_seed=args.seed, n_jobs=args.jobs
    )
    if args.format == "csv":
        lines = ["n,mean_sq"]
        for size, mean_sq in zip(table.sizes, table.mean_sq):
            lines.append(f"{int(size)},{_fmt(mean_sq)}")
        lines.append(f"slope,{_fmt(table.slope)}")
        _write_atomic(args.output, _csv(lines))
    else:
        payload = {
            "schema": 1,
            "experiment": "decay",
            "model": {"name": args.model, "phi": args.phi, "marginal": args.marginal},
            "measure": table.kind.value,
            "k": table.k,
            "reps": table.reps,
            "seed": args.seed,
            "sizes": table.sizes.tolist(),
            "mean_sq": table.mean_sq.tolist(),
            "slope": table.slope,
        }
        _write_atomic(args.output, _json_text(payload))
    return 0


def _add_output_flags(parser) -> None:
    parser.add_argument("--output", "-o", default="-", help="output path, or - for stdout")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_input_flags(parser) -> None:
    parser.add_argument("input", help="data file (one value per line or CSV), or - for stdin")
    parser.add_argument("--column", type=int, default=None, help="CSV column index (0-based)")
    parser.add_argument("--skip-header", action="store_true", help="drop the first line")


def _add_model_flags(parser) -> None:
    parser.add_argument(
        "--model",
        required=True,
        choices=("iid-uniform", "gaussian-ar1", "gaussian-copula-ar1-with-marginal"),
    )
    parser.add_argument("--phi", type=float, default=0.0, help="AR(1) coefficient")
    parser.add_argument("--marginal", default="id", help="marginal transform name")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uspectral",
        description="Lag-window spectral estimation of rank-based serial dependence.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("acf", help="dependence-measure sequence of a series")
    _add_input_flags(p)
    p.add_argument("--measure", default="tau", help="tau, rho or cov")
    p.add_argument("--max-lag", type=int, required=True)
    _add_output_flags(p)
    p.set_defaults(func=cmd_acf)

    p = sub.add_parser("estimate", help="spectral density with inference columns")
    _add_input_flags(p)
    p.add_argument("--measure", default="tau", help="tau, rho or cov")
    p.add_argument("--window", default="parzen", choices=tuple(sorted(WINDOWS)))
    p.add_argument("--bandwidth", default="auto", help='positive number or "auto"')
    p.add_argument("--grid", type=int, default=64, help="grid cells G; frequencies pi*j/G")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--no-bias-correct", action="store_true")
    p.add_argument(
        "--clip-negative",
        action="store_true",
        help="floor displayed f_hat at zero (display only; inference unaffected)",
    )
    _add_output_flags(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="draw a series from a named model")
    _add_model_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_output_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mc", help="Monte Carlo experiments (clt, bias)")
    p.add_argument("--experiment", choices=("clt", "bias"), default="clt")
    _add_model_flags(p)
    p.add_argument("--measure", default="tau")
    p.add_argument("--window", default="parzen", choices=tuple(sorted(WINDOWS)))
    p.add_argument("--bandwidth", default="auto", help='fixed r_n or "auto" (clt)')
    p.add_argument("--bandwidth-list", default=None, help="comma-separated r_n values (bias)")
    p.add_argument("--omega", type=float, action="append", help="target frequency (repeatable)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--no-bias-correct", action="store_true")
    p.add_argument("--jobs", type=int, default=None, help="thread count (or USPECTRAL_THREADS)")
    _add_output_flags(p)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("verify", help="decomposition identity and decay checks")
    p.add_argument("--experiment", choices=("identity", "decay"), default="identity")
    _add_model_flags(p)
    p.add_argument("--measure", default="tau")
    p.add_argument("--k", type=int, default=1, help="lag under inspection")
    p.add_argument("--n", type=int, default=50, help="series length (identity)")
    p.add_argument("--sizes", default="64,128,256,512", help="sample sizes (decay)")
    p.add_argument("--reps", type=int, default=200, help="replicates per size (decay)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=None)
    _add_output_flags(p)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except InternalInvariantError as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
