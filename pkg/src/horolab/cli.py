"""Command-line interface.

Subcommands: fourier, dim, equidist, basis-check, spectral-gap, khintchine,
stationary.  Each reads flags (or a key=value config file via --config),
writes CSV rows to stdout or --out, and emits a JSON summary with the fixed
key set {command, config, seed, exponent, stderr, r2, status}.  Exit codes:
0 success, 2 inconclusive fit, 1 error.  Identical config + seed produce
byte-identical CSV and JSON.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import measures as _measures
from . import diophantine as _dio
from .automorphic import spectral_gap_csv, spectral_gap_fit
from .experiments import ExperimentConfig, run_basis_identity_check, run_equidistribution
from .fitting import DecayReport
from .oscillatory import (
    exponent_fit_oscillatory,
    oscillatory_integral,
    parse_phase,
    parse_window,
    stationary_phase_leading,
)
from .testfunctions import EisensteinTest

_JSON_KEYS = ("command", "config", "seed", "exponent", "stderr", "r2", "status")


class CliError(Exception):
    pass


def _parse_range(text: str, production: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise CliError(f"{production}: expected start:stop:step, got {text!r}")
    try:
        return float(parts[0]), float(parts[1]), float(parts[2])
    except ValueError:
        raise CliError(f"{production}: bad number in {text!r}") from None


def _parse_ygrid(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise CliError(f"<ygrid>: expected ymax:ratio:count, got {text!r}")
    try:
        y_max, ratio, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise CliError(f"<ygrid>: bad number in {text!r}") from None
    return y_max, ratio, count


def _write(path: str | None, payload: str, default_stream):
    if path in (None, "-"):
        default_stream.write(payload)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(payload)


def _emit(args, csv_text: str | None, summary: dict) -> None:
    if csv_text is not None:
        _write(args.out, csv_text, sys.stdout)
    json_text = json.dumps(summary) + "\n"
    if args.json_out not in (None, "-"):
        _write(args.json_out, json_text, sys.stdout)
    elif args.out not in (None, "-") or csv_text is None:
        sys.stdout.write(json_text)
    else:
        sys.stderr.write(json_text)


def _summary(command: str, args, exponent=None, stderr=None, r2=None, status="ok") -> dict:
    config = {
        k: v
        for k, v in sorted(vars(args).items())
        if k not in ("func", "config", "out", "json_out") and v is not None
    }
    return {
        "command": command,
        "config": {k: (v if isinstance(v, (int, float, str)) else str(v)) for k, v in config.items()},
        "seed": getattr(args, "seed", None),
        "exponent": exponent,
        "stderr": stderr,
        "r2": r2,
        "status": status,
    }


def _status_exit(status: str) -> int:
    return 0 if status in ("ok", "degenerate") else 2


def _report_exit(args, command: str, report: DecayReport, csv_text: str) -> int:
    summary = _summary(
        command, args,
        exponent=report.exponent, stderr=report.exponent_stderr, r2=report.r2,
        status=report.status,
    )
    _emit(args, csv_text, summary)
    return _status_exit(report.status)


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_fourier(args) -> int:
    measure = _measures.parse_measure(args.measure)
    start, stop, step = _parse_range(args.xi, "<xi-range>")
    if step <= 0:
        raise CliError("<xi-range>: step must be positive")
    xs = np.arange(start, stop + 0.5 * step, step)
    vals = _measures.fourier_transform(measure, xs, args.tail_tol)
    lines = ["xi,re,im,abs"]
    for x, v in zip(xs, np.atleast_1d(vals)):
        lines.append(
            f"{float(x)!r},{float(v.real)!r},{float(v.imag)!r},{float(abs(v))!r}"
        )
    _emit(args, "\r\n".join(lines) + "\r\n", _summary("fourier", args))
    return 0


def _cmd_dim(args) -> int:
    measure = _measures.parse_measure(args.measure)
    if args.xmax < 10_000:
        raise CliError("<dim>: --xmax must be at least 10^4 (two decades above 100)")
    grid = np.unique(np.round(np.geomspace(100, args.xmax, args.points)).astype(int))
    est = _measures.estimate_dim_l1(
        measure, grid, star=args.star, theta_grid=args.theta_grid
    )
    lines = ["X,partial_sum"]
    for X, s in zip(est.X_grid, est.sums):
        lines.append(f"{int(X)},{float(s)!r}")
    status = "degenerate" if est.degenerate else "ok"
    summary = _summary(
        "dim", args, exponent=est.dimension, stderr=est.stderr, r2=None, status=status
    )
    summary["config"]["slope"] = est.slope
    summary["config"]["slope_full"] = est.slope_full
    if isinstance(measure, _measures.FractalMeasure):
        try:
            bound = _measures.cvy_bound_for_measure(measure, allow_non_ap=args.allow_non_ap)
        except _measures.NonArithmeticDigitsError as exc:
            raise CliError(str(exc)) from None
        summary["config"]["cvy_lower_bound"] = bound
        summary["config"]["hausdorff_dimension"] = measure.hausdorff_dimension()
    _emit(args, "\r\n".join(lines) + "\r\n", summary)
    return 0


def _experiment_config(args, method_default: str) -> ExperimentConfig:
    y_max, ratio, count = _parse_ygrid(args.ygrid)
    args.method = args.method or method_default  # echoed in the JSON config
    return ExperimentConfig(
        measure=args.measure,
        test=args.test,
        y_max=y_max, y_ratio=ratio, y_count=count,
        x0=args.x0, q=args.q,
        method=args.method,
        budget=args.budget, seed=args.seed, sigma=args.sigma, tol=args.tol,
    )


def _cmd_equidist(args) -> int:
    cfg = _experiment_config(args, "montecarlo")
    report = run_equidistribution(cfg)
    return _report_exit(args, "equidist", report, report.to_csv())


def _cmd_basis_check(args) -> int:
    cfg = _experiment_config(args, "cylinder")
    report = run_basis_identity_check(cfg)
    summary = _summary(
        "basis-check", args,
        exponent=report.envelope_constant, stderr=None, r2=None, status="ok",
    )
    summary["config"]["max_discrepancy"] = report.max_discrepancy
    _emit(args, report.to_csv(), summary)
    return 0


def _cmd_spectral_gap(args) -> int:
    y_max, ratio, count = _parse_ygrid(args.ygrid)
    phi = EisensteinTest(t=args.t, component="complex")
    ys = y_max * ratio ** np.arange(count)
    report = spectral_gap_fit(phi, ys)
    return _report_exit(args, "spectral-gap", report, spectral_gap_csv(report))


def _cmd_khintchine(args) -> int:
    measure = _measures.parse_measure(args.measure)
    psi = _dio.parse_psi(args.psi)
    profile = _dio.khintchine_profile(
        measure, psi, args.Q, args.samples, args.seed, rate_q_max=args.rate_qmax
    )
    ratio = profile.mean_count / profile.comparison_sum if profile.comparison_sum else float("nan")
    summary = _summary("khintchine", args, exponent=None, stderr=None, r2=None, status="ok")
    summary["config"]["mean_count"] = profile.mean_count
    summary["config"]["mean_count_stderr"] = profile.mean_count_stderr
    summary["config"]["comparison_sum"] = profile.comparison_sum
    summary["config"]["count_ratio"] = ratio
    summary["config"]["regime"] = profile.regime
    _emit(args, profile.to_csv(), summary)
    return 0


def _cmd_stationary(args) -> int:
    phase = parse_phase(args.phase)
    window = parse_window(args.window)
    start, stop, count = _parse_range(args.xigrid, "<xi-grid>")
    if not (start > 0 and stop > start and count >= 6):
        raise CliError("<xi-grid>: expected start:stop:count with stop > start > 0, count >= 6")
    grid = np.geomspace(start, stop, int(count))
    report = exponent_fit_oscillatory(phase, window, grid, tol=args.tol)
    lines = ["xi,re,im,abs,leading_abs"]
    for xi in grid:
        val = oscillatory_integral(phase, window, float(xi), tol=args.tol)
        try:
            lead = abs(stationary_phase_leading(phase, window, float(xi)))
        except ValueError:
            lead = float("nan")
        lines.append(
            f"{float(xi)!r},{float(val.real)!r},{float(val.imag)!r},"
            f"{float(abs(val))!r},{float(lead)!r}"
        )
    return _report_exit(args, "stationary", report, "\r\n".join(lines) + "\r\n")


# ---------------------------------------------------------------------------
# Parser assembly


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value config file; flags override")
    p.add_argument("--seed", type=int, default=0, help="master seed for all randomness")
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p.add_argument("--json-out", dest="json_out", default=None,
                   help="JSON summary path (default: stdout when --out is a file)")


def build_parser() -> argparse.ArgumentParser:
    root = argparse.ArgumentParser(
        prog="horolab",
        description="numerical experiments on horocycle equidistribution",
    )
    sub = root.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fourier", help="measure transform sweep (CSV xi,re,im,abs)")
    p.add_argument("--measure", required=True)
    p.add_argument("--xi", required=True, help="start:stop:step")
    p.add_argument("--tail-tol", dest="tail_tol", type=float, default=1e-12)
    _add_common(p)
    p.set_defaults(func=_cmd_fourier)

    p = sub.add_parser("dim", help="Fourier l1-dimension estimate")
    p.add_argument("--measure", required=True)
    p.add_argument("--xmax", type=int, required=True)
    p.add_argument("--points", type=int, default=13)
    p.add_argument("--star", action="store_true")
    p.add_argument("--theta-grid", dest="theta_grid", type=int, default=64)
    p.add_argument("--allow-non-ap", dest="allow_non_ap", action="store_true",
                   help="evaluate the progression-only lower bound anyway")
    _add_common(p)
    p.set_defaults(func=_cmd_dim)

    for name, helptext in (
        ("equidist", "horocycle equidistribution decay experiment"),
        ("basis-check", "Fourier-expansion identity check for mu_y"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--measure", required=True)
        p.add_argument("--test", default="eisenstein:t=1")
        p.add_argument("--ygrid", default="0.25:0.5:15", help="ymax:ratio:count")
        p.add_argument("--x0", type=float, default=0.0)
        p.add_argument("--q", type=int, default=1)
        p.add_argument("--method", choices=("cylinder", "montecarlo"), default=None)
        p.add_argument("--budget", type=int, default=10**6)
        p.add_argument("--sigma", type=float, default=1.2)
        p.add_argument("--tol", type=float, default=1e-6)
        _add_common(p)
        p.set_defaults(func=_cmd_equidist if name == "equidist" else _cmd_basis_check)

    p = sub.add_parser("spectral-gap", help="sup Fourier coefficient decay sweep")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--ygrid", default="0.125:0.5:10", help="ymax:ratio:count")
    _add_common(p)
    p.set_defaults(func=_cmd_spectral_gap)

    p = sub.add_parser("khintchine", help="approximation counting profile")
    p.add_argument("--measure", required=True)
    p.add_argument("--psi", default="pow:1")
    p.add_argument("--Q", type=int, default=10**4)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--rate-qmax", dest="rate_qmax", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_khintchine)

    p = sub.add_parser("stationary", help="oscillatory-integral decay sweep")
    p.add_argument("--phase", required=True, help="poly:c0,c1,...")
    p.add_argument("--window", default="coswin:0,1")
    p.add_argument("--xigrid", default="10:10000:25", help="start:stop:count")
    p.add_argument("--tol", type=float, default=1e-10)
    _add_common(p)
    p.set_defaults(func=_cmd_stationary)

    return root


def _apply_config_file(argv: list[str], parser: argparse.ArgumentParser) -> list[str]:
    """Expand --config FILE into leading flags (command line overrides)."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise CliError("--config needs a file path")
    path = argv[idx + 1]
    injected = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CliError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            flag = "--" + key.replace("_", "-")
            if key.replace("-", "_") in ("star", "allow_non_ap"):
                # store_true flags take no argument; a falsy value means omit
                if value.lower() in ("true", "yes", "1"):
                    injected.append(flag)
            else:
                injected.extend([flag, value])
    # keep the subcommand first, then injected defaults, then explicit flags
    return argv[:1] + injected + [a for i, a in enumerate(argv[1:], 1) if i not in (idx, idx + 1)]


def cli_main(argv: list[str]) -> int:
    parser = build_parser()
    try:
        if argv and argv[0] not in ("-h", "--help") and "--config" in argv:
            argv = _apply_config_file(argv, parser)
        args = parser.parse_args(argv)
        return args.func(args)
    except (CliError, ValueError, OSError) as exc:
        sys.stderr.write(f"horolab: error: {exc}\n")
        return 1


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
