"""Command line interface.

Subcommands::

    steinmvn test      --data X.csv --a 0.5,1,2 --reps 10000 --seed 1
    steinmvn critvals  --n 20,50 --d 1,2 --a 0.5,1,inf --reps 20000 --out crit.csv
    steinmvn power     --alt nmix1 --n 50 --d 1 --a 1,2 --reps 5000
    steinmvn coverage  --alt uniform --n 100 --d 1 --a 0.5 --reps 2000
    steinmvn delta     --alt laplace --d 2 --a 0.5,1,2,5

Standard output carries a JSON report; progress goes to standard error.
Exit status: 0 success, 2 usage error, 3 malformed input file,
4 numerical failure, 5 I/O failure.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .competitors import bhep_stat, energy_stat, hv_stat, hz_stat
from .errors import (
    InvalidArgumentError,
    ParseError,
    SingularCovarianceError,
    SteinMVNError,
    TooLargeForNaiveError,
    UnsupportedDimensionError,
)
from .experiments import DEFAULT_COMPETITORS, coverage_study, power_study
from .inference import delta_limits, delta_numeric
from .montecarlo import WORKERS_ENV, key_label, statistic_key, stderr_progress
from .nulldist import SimulationConfig, empirical_quantile, null_statistics
from .samplers import parse_alternative
from .standardize import scaled_residuals
from .statistic import scaled_statistic, t_stat

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_NUMERIC = 4
EXIT_IO = 5

LOW_PRECISION_REPS = 1000


# --- reports -----------------------------------------------------------------


def _encode(obj):
    """Replace non-finite floats by strings so the JSON stays standard."""
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, np.generic):
        return _encode(obj.item())
    return obj


def _decode(obj):
    if obj in ("inf", "-inf", "nan"):
        return float(obj)
    if isinstance(obj, dict):
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


@dataclass
class ReportRecord:
    """Machine-readable result of one CLI invocation."""

    command: str
    parameters: dict
    results: dict
    seconds: float = 0.0
    notes: list = field(default_factory=list)
    version: str = __version__

    def to_json(self, indent=2):
        return json.dumps(_encode(asdict(self)), indent=indent)

    @classmethod
    def from_json(cls, text):
        return cls(**_decode(json.loads(text)))


# --- input parsing -----------------------------------------------------------


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_csv_matrix(path):
    """Read a numeric CSV into an ``(n, d)`` array.

    A first row containing any non-numeric cell is taken as a header.
    Blank lines are skipped.

    Raises
    ------
    ParseError
        On ragged rows or non-numeric cells (1-based row and column).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        text = fh.read()
    rows = [(i + 1, r) for i, r in enumerate(csv.reader(io.StringIO(text)))]
    rows = [(i, [c.strip() for c in r]) for i, r in rows if any(c.strip() for c in r)]
    if not rows:
        raise ParseError("no data rows in CSV")
    header = None
    if not all(_is_number(c) for c in rows[0][1]):
        header = rows[0][1]
        rows = rows[1:]
    if not rows:
        raise ParseError("CSV has a header but no data rows")
    width = len(header) if header is not None else len(rows[0][1])
    data = np.empty((len(rows), width))
    for k, (line, cells) in enumerate(rows):
        if len(cells) != width:
            raise ParseError(f"expected {width} fields, found {len(cells)}", row=line)
        for j, c in enumerate(cells):
            try:
                data[k, j] = float(c)
            except ValueError:
                raise ParseError(f"non-numeric value {c!r}", row=line, column=j + 1) from None
            if not math.isfinite(data[k, j]):
                raise ParseError(f"non-finite value {c!r}", row=line, column=j + 1)
    return data, header


def _float_list(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _int_list(text):
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _default_workers():
    env = os.environ.get(WORKERS_ENV)
    return int(env) if env else (os.cpu_count() or 1)


def _progress(args):
    if args.quiet:
        return None
    return stderr_progress


def _notes(reps):
    if reps < LOW_PRECISION_REPS:
        return [f"low precision: only {reps} Monte Carlo replications"]
    return []


# --- commands ----------------------------------------------------------------


def cmd_test(args):
    X, header = read_csv_matrix(args.data)
    n, d = X.shape
    if n < d + 1:
        raise SingularCovarianceError(
            f"{n} rows in dimension {d}: at least d + 1 = {d + 1} observations are needed"
        )
    Y = scaled_residuals(X)
    cfg = SimulationConfig(reps=args.reps, seed=args.seed, workers=args.workers)
    comp = [statistic_key(c) for c in DEFAULT_COMPETITORS] if args.competitors else []
    prog = _progress(args)
    sims = null_statistics(n, d, args.a, cfg, extra=comp, progress=prog and prog("null"))

    stats = {}
    for a in args.a:
        key = statistic_key("T", a)
        scaled = scaled_statistic(Y, a)
        stats[key_label(key)] = {
            "a": a,
            "T": None if math.isinf(a) else t_stat(Y, a),
            "scaled": scaled,
            "p_value": (int(np.sum(sims[key] >= scaled)) + 1) / (cfg.reps + 1),
        }
    if comp:
        observed = {
            ("BHEP", 1.0): bhep_stat(Y), ("HZ", None): hz_stat(Y),
            ("HV", 5.0): hv_stat(Y), ("EN", None): energy_stat(Y),
        }
        for key in comp:
            obs = observed[key]
            stats[key_label(key)] = {
                "statistic": obs,
                "p_value": (int(np.sum(sims[key] >= obs)) + 1) / (cfg.reps + 1),
            }
    params = {"data": str(args.data), "n": n, "d": d, "a": args.a, "reps": args.reps,
              "seed": args.seed, "alpha": args.alpha, "competitors": args.competitors}
    results = {"statistics": stats,
               "reject": {k: v["p_value"] <= args.alpha for k, v in stats.items()}}
    if header:
        results["columns"] = header
    return ReportRecord("test", params, results, notes=_notes(args.reps))


def cmd_critvals(args):
    cfg = SimulationConfig(reps=args.reps, seed=args.seed, level=args.level, workers=args.workers)
    prog = _progress(args)
    rows = []
    for d in args.d:
        for n in args.n:
            sims = null_statistics(n, d, args.a, cfg, progress=prog and prog(f"d={d} n={n}"))
            for a in args.a:
                q = empirical_quantile(sims[statistic_key("T", a)], args.level)
                rows.append({"d": d, "n": n, "a": a, "critical_value": q})
    if args.out:
        _write_table(args.out, rows)
    params = {"n": args.n, "d": args.d, "a": args.a, "level": args.level,
              "reps": args.reps, "seed": args.seed, "out": args.out}
    return ReportRecord("critvals", params, {"table": rows}, notes=_notes(args.reps))


def _write_table(path, rows):
    path = str(path)
    try:
        if path.lower().endswith(".json"):
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(_encode(rows), fh, indent=2)
        else:
            with open(path, "w", newline="", encoding="utf-8") as fh:
                w = csv.DictWriter(fh, fieldnames=list(rows[0]))
                w.writeheader()
                for r in rows:
                    w.writerow({k: ("inf" if isinstance(v, float) and math.isinf(v) else v)
                                for k, v in r.items()})
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def cmd_power(args):
    alt = parse_alternative(args.alt, args.d)
    comp = [] if args.no_competitors else list(DEFAULT_COMPETITORS)
    res = power_study(alt, args.n, args.a, alpha=args.level, reps=args.reps, seed=args.seed,
                      competitors=comp, workers=args.workers, progress=_progress(args))
    params = {"alt": alt.label, "n": args.n, "d": args.d, "a": args.a, "level": args.level,
              "reps": args.reps, "seed": args.seed, "competitors": comp}
    results = {"power_percent": res.power, "size_percent": res.size,
               "critical_values": res.critical_values}
    return ReportRecord("power", params, results, notes=_notes(args.reps))


def cmd_coverage(args):
    alt = parse_alternative(args.alt, args.d)
    prog = _progress(args)
    res = coverage_study(alt, args.n, args.a, alpha=args.alpha, reps=args.reps, seed=args.seed,
                         delta=args.delta, workers=args.workers,
                         progress=prog and prog("coverage"))
    params = {"alt": alt.label, "n": args.n, "d": args.d, "a": args.a, "alpha": args.alpha,
              "reps": args.reps, "seed": args.seed, "delta": args.delta}
    results = {"delta": res.delta, "coverage_percent": res.coverage,
               "stderr_percent": res.stderr, "mean_halfwidth": res.mean_halfwidth}
    return ReportRecord("coverage", params, results, notes=_notes(args.reps))


def cmd_delta(args):
    alt = parse_alternative(args.alt, args.d)
    values = {}
    for a in args.a:
        values[format(a, "g")] = delta_numeric(alt, a).value
    results = {"delta": values}
    params = {"alt": alt.label, "d": args.d, "a": args.a, "limits": args.limits}
    if args.limits:
        lim = delta_limits(alt, cfg=SimulationConfig(reps=args.reps, seed=args.seed))
        results["limits"] = asdict(lim)
        params.update(reps=args.reps, seed=args.seed)
    return ReportRecord("delta", params, results)


# --- entry point ---------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="steinmvn", description="Affine invariant tests for multivariate normality.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, reps=10000):
        sp.add_argument("--reps", type=int, default=reps, help="Monte Carlo replications")
        sp.add_argument("--seed", type=_seed, default=0)
        sp.add_argument("--workers", type=int, default=None,
                        help=f"worker processes (default ${WORKERS_ENV} or CPU count)")
        sp.add_argument("--json", dest="json_path", default=None, help="also write the report here")
        sp.add_argument("--quiet", action="store_true", help="no progress output")

    sp = sub.add_parser("test", help="test a CSV data set for normality")
    sp.add_argument("--data", required=True)
    sp.add_argument("--a", type=_float_list, default=[0.5, 1.0, 2.0, 5.0, 10.0])
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--competitors", action="store_true", help="also run BHEP, HZ, HV and EN")
    common(sp)
    sp.set_defaults(func=cmd_test)

    sp = sub.add_parser("critvals", help="simulate critical values")
    sp.add_argument("--n", type=_int_list, required=True)
    sp.add_argument("--d", type=_int_list, required=True)
    sp.add_argument("--a", type=_float_list, required=True, help="weights; 'inf' allowed")
    sp.add_argument("--level", type=float, default=0.95, help="quantile level")
    sp.add_argument("--out", default=None, help="table file (.csv or .json)")
    common(sp)
    sp.set_defaults(func=cmd_critvals)

    sp = sub.add_parser("power", help="empirical power against an alternative")
    sp.add_argument("--alt", required=True, help="e.g. nmix1, t:3, chi2:5, gamma:4,2")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--a", type=_float_list, default=[0.5, 1.0, 2.0, 5.0, 10.0, math.inf])
    sp.add_argument("--level", type=float, default=0.05, help="significance level alpha")
    sp.add_argument("--no-competitors", action="store_true")
    common(sp, reps=5000)
    sp.set_defaults(func=cmd_power)

    sp = sub.add_parser("coverage", help="coverage of the asymptotic confidence interval")
    sp.add_argument("--alt", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--delta", type=float, default=None, help="target value (default: computed)")
    common(sp, reps=2000)
    sp.set_defaults(func=cmd_coverage)

    sp = sub.add_parser("delta", help="population distance Delta_a for analytic alternatives")
    sp.add_argument("--alt", required=True)
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--a", type=_float_list, default=[0.5, 1.0, 2.0, 5.0])
    sp.add_argument("--limits", action="store_true", help="also estimate the boundary limits")
    common(sp, reps=200000)
    sp.set_defaults(func=cmd_delta)
    return p


def _echo(args):
    return {k: v for k, v in vars(args).items() if k not in ("func",)}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", None) is None:
        args.workers = _default_workers()
    start = time.perf_counter()
    try:
        report = args.func(args)
        report.seconds = time.perf_counter() - start
        report.parameters["argv"] = _echo(args)
        text = report.to_json()
        if args.json_path:
            with open(args.json_path, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
    except ParseError as exc:
        print(f"steinmvn: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (InvalidArgumentError, UnsupportedDimensionError, TooLargeForNaiveError) as exc:
        print(f"steinmvn: invalid argument: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SingularCovarianceError, ArithmeticError) as exc:
        print(f"steinmvn: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SteinMVNError as exc:
        print(f"steinmvn: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"steinmvn: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(text)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
