"""Command-line front end: ``cvqkd {keyrate,figure3,limit,montecarlo}``.

Exit status is 0 on success, 1 on a domain or statistical failure and 2 on a
usage error.  CSV output is UTF-8 with ``\\n`` line endings, a header row and
12 significant digits.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import montecarlo, protocol
from .errors import CVQKDError
from .protocol import ChannelParams, KeyRateReport, SourceParams

SWEEP_VARIABLES = ("T", "epsilon0", "epsilon_c", "V")
PARAM_COLUMNS = ["T", "epsilon0", "epsilon_c", "V"]
REPORT_COLUMNS = [f.name for f in fields(KeyRateReport)]
MIN_CLI_SAMPLES = 10_000
T_MARGIN = 1e-6


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def write_csv(stream, header, rows):
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])


def write_table(stream, header, rows):
    cells = [list(header)] + [[fmt(v) for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    for r in cells:
        stream.write("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    steps: int
    fixed: dict

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise protocol.DomainError(f"sweep variable must be one of {SWEEP_VARIABLES}")
        if self.steps < 2:
            raise protocol.DomainError("--steps must be >= 2")
        if not self.start < self.stop:
            raise protocol.DomainError("sweep start must be < stop")
        if self.variable == "T" and (self.start < T_MARGIN or self.stop > 1.0 - T_MARGIN):
            raise protocol.DomainError(
                f"swept transmittance must stay within [{T_MARGIN:g}, 1 - {T_MARGIN:g}]"
            )

    def positions(self) -> np.ndarray:
        # linspace pins both endpoints exactly
        return np.linspace(self.start, self.stop, self.steps)

    def points(self):
        for x in self.positions():
            p = dict(self.fixed)
            p[self.variable] = float(x)
            yield p


def params_from(p: dict):
    return (SourceParams.from_total_variance(p["V"], p["epsilon0"]),
            ChannelParams(p["T"], p["epsilon_c"]))


def keyrate_row(p: dict) -> list:
    report = protocol.key_rates(*params_from(p)).as_dict()
    return [p[k] for k in PARAM_COLUMNS] + [report[k] for k in REPORT_COLUMNS]


def _fixed_params(args) -> dict:
    v = args.V if args.VA is None else args.VA + 1.0
    return {"T": args.T, "epsilon0": args.epsilon0, "epsilon_c": args.epsilon_c, "V": v}


def cmd_keyrate(args, out) -> int:
    fixed = _fixed_params(args)
    if args.sweep:
        var, start, stop = args.sweep
        spec = SweepSpec(var, float(start), float(stop), args.steps, fixed)
        rows = [keyrate_row(p) for p in spec.points()]
        header = PARAM_COLUMNS + REPORT_COLUMNS
        (write_csv if args.format == "csv" else write_table)(out, header, rows)
        return 0
    row = keyrate_row(fixed)
    header = PARAM_COLUMNS + REPORT_COLUMNS
    if args.format == "csv":
        write_csv(out, header, [row])
    else:
        write_table(out, ["quantity", "value"], [[h, fmt(v)] for h, v in zip(header, row)])
    return 0


def figure3_rows(epsilon0: float, steps: int, t_start: float = 0.01, t_stop: float = 0.99):
    """Rows ``(T, bound, prior)`` of the large-modulation reverse rates on a noiseless channel."""
    spec = SweepSpec("T", t_start, t_stop, steps, {"epsilon0": epsilon0})
    rows = []
    for T in spec.positions():
        src, ch = SourceParams(0.0, epsilon0), ChannelParams(float(T), 0.0)
        rows.append([float(T), protocol.k_reverse_asymptotic(src, ch),
                     protocol.prior_k_reverse_asymptotic(src, ch)])
    return rows


def cmd_figure3(args, out) -> int:
    if args.strict and args.epsilon0 is None:
        raise UsageError("--epsilon0 is mandatory with --strict")
    eps0 = 0.2 if args.epsilon0 is None else args.epsilon0
    rows = figure3_rows(eps0, args.steps, args.t_start, args.t_stop)
    header = ["T", "k_reverse_asymptotic", "prior_k_reverse_asymptotic"]
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                write_csv(fh, header, rows)
        except OSError as exc:
            raise CVQKDError(f"cannot write --out {args.out}: {exc.strerror}") from exc
    else:
        write_csv(out, header, rows)
    return 0


def cmd_limit(args, out) -> int:
    lim = protocol.limiting_epsilon0()
    header = ["closed_form", "bisection", "difference"]
    row = [lim.closed_form, lim.bisection, lim.difference]
    if args.format == "csv":
        write_csv(out, header, [row])
    else:
        write_table(out, ["quantity", "value"], [[h, fmt(v)] for h, v in zip(header, row)])
    return 0


def cmd_montecarlo(args, out) -> int:
    if args.samples < MIN_CLI_SAMPLES:
        raise CVQKDError(f"--samples must be >= {MIN_CLI_SAMPLES} (estimates too noisy), got {args.samples}")
    p = _fixed_params(args)
    src, ch = params_from(p)
    scale = 0.5 if args.corrupt_eb else 1.0
    eq = montecarlo.equivalence_check(src, ch, args.samples, args.seed, correlation_scale=scale,
                                      min_samples=MIN_CLI_SAMPLES, workers=args.workers)
    pm = montecarlo.theory_check(montecarlo.sample_pm(src, ch, args.samples, args.seed, args.workers), src, ch)
    rows = [["pm-vs-eb", c.name, c.observed, c.expected, c.z, c.passed] for c in eq.comparisons]
    rows += [["pm-vs-theory", c.name, c.observed, c.expected, c.z, c.passed] for c in pm.comparisons]
    header = ["check", "quantity", "observed", "expected", "z", "pass"]
    if args.format == "csv":
        write_csv(out, header, rows)
    else:
        write_table(out, header, rows)
    failed = [f"{r[0]}:{r[1]}" for r in rows if not r[5]]
    if failed:
        print(f"cvqkd: statistical failure: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--T", type=float, default=0.5, help="channel transmittance, 0 < T < 1")
    common.add_argument("--epsilon0", type=float, default=0.1, help="trusted source excess noise (SNU)")
    common.add_argument("--epsilon-c", dest="epsilon_c", type=float, default=0.0,
                        help="channel excess noise (SNU)")
    var = common.add_mutually_exclusive_group()
    var.add_argument("--V", type=float, default=20.0, help="total variance V = V_A + 1 (SNU)")
    var.add_argument("--VA", type=float, default=None, help="modulation variance V_A (SNU)")
    fmt_flag = argparse.ArgumentParser(add_help=False)
    fmt_flag.add_argument("--format", choices=("table", "csv"), default="table")

    parser = argparse.ArgumentParser(prog="cvqkd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    kr = sub.add_parser("keyrate", parents=[common, fmt_flag], help="key rates at one point or along a sweep")
    kr.add_argument("--sweep", nargs=3, metavar=("VAR", "START", "STOP"),
                    help=f"sweep VAR in {{{','.join(SWEEP_VARIABLES)}}}")
    kr.add_argument("--steps", type=int, default=11)
    kr.set_defaults(func=cmd_keyrate)

    f3 = sub.add_parser("figure3", help="large-modulation bound vs prior rate over T (CSV)")
    f3.add_argument("--epsilon0", type=float, default=None, help="source excess noise (default 0.2)")
    f3.add_argument("--steps", type=int, default=99)
    f3.add_argument("--t-start", type=float, default=0.01)
    f3.add_argument("--t-stop", type=float, default=0.99)
    f3.add_argument("--out", default=None, help="output file (default: standard output)")
    f3.add_argument("--strict", action="store_true", help="require an explicit --epsilon0")
    f3.set_defaults(func=cmd_figure3)

    lim = sub.add_parser("limit", parents=[fmt_flag], help="limiting source noise for T -> 1")
    lim.set_defaults(func=cmd_limit)

    mc = sub.add_parser("montecarlo", parents=[common, fmt_flag], help="Monte Carlo validation run")
    mc.add_argument("--samples", type=int, default=1_000_000)
    mc.add_argument("--seed", type=int, default=42)
    mc.add_argument("--workers", type=int, default=None)
    mc.add_argument("--corrupt-eb", action="store_true",
                    help="halve the E-B cross-correlation (negative control)")
    mc.set_defaults(func=cmd_montecarlo)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except UsageError as exc:
        parser.error(str(exc))
    except CVQKDError as exc:
        print(f"cvqkd: error: {exc}", file=sys.stderr)
        return 1


def run(argv) -> tuple[int, str]:
    """Run the CLI in-process and capture standard output."""
    buf = io.StringIO()
    try:
        code = main(argv, buf)
    except SystemExit as exc:
        code = exc.code
    return code, buf.getvalue()
