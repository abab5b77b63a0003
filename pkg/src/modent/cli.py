"""Command-line front end: ``modent <command> [options]``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields

from . import __version__
from .entropy import (
    average_entropy_limit,
    entropy_current,
    entropy_k,
    entropy_subnet,
    entropy_subnet_k2,
    universal_bound_check,
)
from .errors import ModentError, MomentError, NormalizationError, ParseError
from .fdmodular import axiom_suite
from .funcspace import IntervalRegion, parse_function
from .kspaces import KVector
from .legendre import eigen_check, spectral_bound_check
from .modular import flow_derivative_order, identity_IdD_check

SCHEMA_VERSION = 1
COMMANDS = ("entropy", "bound", "flowcheck", "legendre", "oracle", "scan")
PICTURES = ("subnet", "variance", "kspace")

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_NORMALIZATION = 2
EXIT_USAGE = 3
EXIT_NUMERICAL = 4

EPILOG = """\
exit codes:
  0  success
  1  a verification failed (oracle violation, bound or convergence check)
  2  moment or normalization obstruction (the function is not admissible)
  3  bad usage: unparsable function literal, invalid option or config
  4  numerical failure (quadrature, FFT resolution, pole, conditioning)

function literals: x, numbers, pi, e, + - * / ^, exp(.), bump(.), gauss(.),
step(.) with affine arguments, window(B) | window(R) | window(a, b[, margin]).
Example: "x*window(B)" or "(x^2 - 1/3)*window(B)".

environment: MODENT_THREADS caps the worker threads used by scan.
"""


@dataclass
class RunConfig:
    """All inputs of one CLI run; serializes to canonical JSON."""

    command: str = "entropy"
    function: str = "x*window(B)"
    k: int = 1
    interval: tuple = (-1.0, 1.0)
    picture: str = "subnet"
    R_values: tuple = (2.0, 4.0, 8.0, 16.0)
    tolerance: float = 1e-8
    gap_tolerance: float | None = None
    n_max: int = 20
    h: float = 0.002
    points: int = 200
    trials: int = 1000
    max_n: int = 4
    seed: int = 0
    format: str = "json"
    output_path: str | None = None
    mutate: bool = False

    def __post_init__(self):
        self.interval = tuple(float(v) for v in self.interval)
        self.R_values = tuple(float(v) for v in self.R_values)
        self.validate()

    def validate(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.picture not in PICTURES:
            raise ValueError(f"unknown picture {self.picture!r}")
        if self.format not in ("json", "csv"):
            raise ValueError(f"unknown format {self.format!r}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("k must be a positive integer")
        if len(self.interval) != 2 or not self.interval[0] < self.interval[1]:
            raise ValueError("interval must be a, b with a < b")
        if any(r <= 0 for r in self.R_values):
            raise ValueError("R values must be positive")
        if list(self.R_values) != sorted(self.R_values):
            raise ValueError("R values must be increasing")
        if self.trials < 0 or self.max_n < 1:
            raise ValueError("trials must be >= 0 and max_n >= 1")

    def region(self) -> IntervalRegion:
        return IntervalRegion(*self.interval)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["interval"] = list(self.interval)
        d["R_values"] = list(self.R_values)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _interval(text: str) -> tuple:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad interval {text!r}") from None
    if len(vals) == 1:
        return (-vals[0], vals[0])
    if len(vals) == 2:
        return tuple(vals)
    raise argparse.ArgumentTypeError("interval is 'a,b' or a radius 'R'")


def _floats(text: str) -> tuple:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="modent", description="Entropy of vectors for the U(1)-current "
                     "net and its derivative subnets, with verification sweeps.",
                     epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"modent {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, function=True):
        p.add_argument("--config", help="JSON file with RunConfig fields (flags override it)")
        p.add_argument("--output", dest="output_path", help="write the report here instead of stdout")
        p.add_argument("--print-config", action="store_true",
                       help="print the canonical config JSON and exit")
        if function:
            p.add_argument("--f", "--function", dest="function", help="function literal")
            p.add_argument("--k", type=int, help="derivative index k >= 1")
            p.add_argument("--interval", type=_interval, help="'a,b' or radius 'R'")

    p = sub.add_parser("entropy", help="entropy of a function on an interval", epilog=EPILOG,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p)
    p.add_argument("--picture", choices=PICTURES,
                   help="subnet: [f]_1 relative to the k-th subnet (default); variance: k = 2 "
                        "with mean subtraction; kspace: [f]_k relative to H^(k)")

    p = sub.add_parser("bound", help="universal bound: subnet vs current entropy", epilog=EPILOG,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p)

    p = sub.add_parser("flowcheck", help="flow difference quotient vs generator", epilog=EPILOG,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p)
    p.add_argument("--h", type=float, help="largest flow step (halved twice)")
    p.add_argument("--points", type=int, help="interior grid points")

    p = sub.add_parser("legendre", help="Legendre eigen-residuals and the spectral bound",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p)
    p.add_argument("--n-max", dest="n_max", type=int, help="largest degree checked")

    p = sub.add_parser("oracle", help="finite-dimensional axiom suite", epilog=EPILOG,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p, function=False)
    p.add_argument("--trials", type=int)
    p.add_argument("--max-n", dest="max_n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--mutate", action="store_true", default=None, help=argparse.SUPPRESS)

    p = sub.add_parser("scan", help="average entropy S/R over growing intervals", epilog=EPILOG,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p)
    p.add_argument("--R", dest="R_values", type=_floats, help="comma-separated radii")
    p.add_argument("--gap-tol", dest="gap_tolerance", type=float,
                   help="fail (exit 1) when the gap at the largest R exceeds this")
    p.add_argument("--format", choices=("json", "csv"))
    return parser


_GLUED = ("--interval", "--R")


def _glue(argv: list) -> list:
    """Attach values such as ``-1,1`` to their option so argparse does not read
    them as flags."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _GLUED and i + 1 < len(argv):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
    data["command"] = args.command
    for f in fields(RunConfig):
        if f.name == "command":
            continue
        val = getattr(args, f.name, None)
        if val is not None:
            data[f.name] = val
    return RunConfig.from_dict(data)


def _threads() -> int:
    raw = os.environ.get("MODENT_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return min(4, os.cpu_count() or 1)


def _dump(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _envelope(cfg: RunConfig, result: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": cfg.command, "config": cfg.to_dict(),
            "result": result}


def cmd_entropy(cfg: RunConfig) -> tuple:
    f = parse_function(cfg.function)
    region = cfg.region()
    if cfg.picture == "kspace":
        report = entropy_k(KVector(f, cfg.k), region, cross_check=True)
    elif cfg.picture == "variance":
        if cfg.k != 2:
            raise ValueError("the variance picture is the k = 2 subnet")
        report = entropy_subnet_k2(f, region)
    elif cfg.k == 1:
        report = entropy_current(f, region, cross_check=True)
    else:
        report = entropy_subnet(f, cfg.k, region, cross_check=True)
    return report.to_dict(), EXIT_OK


def cmd_bound(cfg: RunConfig) -> tuple:
    f = parse_function(cfg.function)
    res = universal_bound_check(f, cfg.k, cfg.region())
    ok = res.slack >= -cfg.tolerance and abs(res.slack - res.predicted_slack) <= 1e-7
    return dict(res._asdict(), ok=ok), EXIT_OK if ok else EXIT_VIOLATION


def cmd_flowcheck(cfg: RunConfig) -> tuple:
    f = parse_function(cfg.function)
    res = flow_derivative_order(f, cfg.k, h=cfg.h, points=cfg.points, interval=cfg.region())
    if cfg.k >= 2:
        res["identity_residual"] = identity_IdD_check(f, cfg.k)
    ok = res["order"] >= 1.9 and res.get("identity_residual", 0.0) <= cfg.tolerance
    res["ok"] = ok
    return res, EXIT_OK if ok else EXIT_VIOLATION


def cmd_legendre(cfg: RunConfig) -> tuple:
    residuals = [eigen_check(n) for n in range(cfg.n_max + 1)]
    out = {"eigen_residuals": residuals, "max_eigen_residual": max(residuals)}
    ok = out["max_eigen_residual"] <= cfg.tolerance
    if cfg.function:
        b = spectral_bound_check(parse_function(cfg.function), cfg.k)
        out["bound"] = b._asdict()
        ok = ok and b.slack >= -cfg.tolerance
    out["ok"] = ok
    return out, EXIT_OK if ok else EXIT_VIOLATION


def cmd_oracle(cfg: RunConfig) -> tuple:
    report = axiom_suite(cfg.trials, cfg.max_n, cfg.seed, cfg.tolerance, mutate=cfg.mutate)
    return report, EXIT_VIOLATION if report["violations"] else EXIT_OK


SCAN_COLUMNS = ("R", "S", "S_over_R", "limit", "gap")


def scan_rows(cfg: RunConfig) -> list:
    f = parse_function(cfg.function)
    limit = average_entropy_limit(f)

    def one(R):
        S = entropy_subnet(f, cfg.k, IntervalRegion.centered(R)).value
        return {"R": R, "S": S, "S_over_R": S / R, "limit": limit, "gap": abs(S / R - limit)}

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        return list(pool.map(one, cfg.R_values))


def cmd_scan(cfg: RunConfig) -> tuple:
    rows = scan_rows(cfg)
    ok = cfg.gap_tolerance is None or not rows or rows[-1]["gap"] <= cfg.gap_tolerance
    return {"rows": rows}, EXIT_OK if ok else EXIT_VIOLATION


def scan_csv(rows: list) -> str:
    buf = io.StringIO()
    buf.write(f"# modent scan schema_version={SCHEMA_VERSION} columns={','.join(SCAN_COLUMNS)}\r\n")
    writer = csv.DictWriter(buf, fieldnames=SCAN_COLUMNS)
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(float(row[k])) for k in SCAN_COLUMNS})
    return buf.getvalue()


HANDLERS = {"entropy": cmd_entropy, "bound": cmd_bound, "flowcheck": cmd_flowcheck,
            "legendre": cmd_legendre, "oracle": cmd_oracle, "scan": cmd_scan}


def _emit(text: str, cfg: RunConfig | None):
    if cfg is not None and cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _error_payload(exc: Exception) -> dict:
    out = {"schema_version": SCHEMA_VERSION, "error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, MomentError):
        out["moments"] = [float(m) for m in exc.moments]
    if isinstance(exc, NormalizationError):
        out["boundary_values"] = [float(v) for v in exc.boundary_values]
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(_glue(argv))
    try:
        cfg = config_from_args(args)
    except (ValueError, TypeError, OSError) as exc:
        sys.stderr.write(f"modent: invalid configuration: {exc}\n")
        return EXIT_USAGE
    if args.print_config:
        sys.stdout.write(cfg.to_json() + "\n")
        return EXIT_OK
    try:
        result, code = HANDLERS[cfg.command](cfg)
    except (MomentError, NormalizationError) as exc:
        _emit(_dump(_error_payload(exc)), cfg)
        return EXIT_NORMALIZATION
    except ParseError as exc:
        sys.stderr.write(_dump(_error_payload(exc)))
        return EXIT_USAGE
    except ModentError as exc:
        sys.stderr.write(_dump(_error_payload(exc)))
        return EXIT_NUMERICAL
    except ValueError as exc:
        sys.stderr.write(_dump(_error_payload(exc)))
        return EXIT_USAGE
    if cfg.command == "scan" and cfg.format == "csv":
        _emit(scan_csv(result["rows"]), cfg)
        return code
    _emit(_dump(_envelope(cfg, _finite(result))), cfg)
    return code


def _finite(obj):
    """JSON has no infinities: map non-finite floats to strings."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
