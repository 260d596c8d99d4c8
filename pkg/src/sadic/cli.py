"""Command line: ``sadic stats | dimension | verify``.

Exit codes: 0 success, 1 verify failure, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import dsl, verify
from . import generators as gen
from . import stats as st
from .digits import DomainError

log = logging.getLogger("sadic")

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


@dataclass
class ExperimentConfig:
    pipeline: str
    checkpoints: str = "geometric"
    max_n: int = 10**6
    n_max: int = 3
    p: Fraction = Fraction(1)
    tol_mean: float = 0.01
    tol_freq: float = 0.01
    format: str = "csv"
    out: str | None = None
    seed: int | None = None
    counts: bool = False
    expr: dsl.PipelineExpr | None = field(default=None, repr=False)

    def validate(self) -> "ExperimentConfig":
        if not isinstance(self.pipeline, str) or not self.pipeline.strip():
            raise ConfigError("pipeline", "a pipeline expression is required")
        try:
            self.expr = dsl.parse(self.pipeline)
        except dsl.ParseError as e:
            raise ConfigError("pipeline", str(e)) from None
        if self.checkpoints not in ("geometric", "paper-l"):
            raise ConfigError("checkpoints", "must be 'geometric' or 'paper-l'")
        if not isinstance(self.max_n, int) or self.max_n < 1:
            raise ConfigError("max_n", "must be a positive integer")
        if not isinstance(self.n_max, int) or self.n_max < 1:
            raise ConfigError("n_max", "must be a positive integer")
        if not self.p > 0:
            raise ConfigError("p", "must be positive")
        for name in ("tol_mean", "tol_freq"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or v < 0:
                raise ConfigError(f"tolerances.{name.split('_')[1]}", "must be a nonnegative number")
        if self.format not in ("csv", "json"):
            raise ConfigError("format", "must be 'csv' or 'json'")
        if self.seed is not None and (not isinstance(self.seed, int) or self.seed < 0):
            raise ConfigError("seed", "must be a nonnegative integer")
        return self

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        known = {"pipeline", "checkpoints", "tolerances", "format", "out", "seed", "counts"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown key")
        cfg = cls(pipeline=data.get("pipeline", ""))
        cp = data.get("checkpoints", {"kind": "geometric"})
        if isinstance(cp, str):
            cp = {"kind": cp}
        if not isinstance(cp, dict):
            raise ConfigError("checkpoints", "must be an object or a schedule name")
        cfg.checkpoints = cp.get("kind", "geometric")
        cfg.max_n = cp.get("max_n", cfg.max_n)
        cfg.n_max = cp.get("n_max", cfg.n_max)
        try:
            cfg.p = Fraction(str(cp.get("p", 1)))
        except (ValueError, ZeroDivisionError):
            raise ConfigError("checkpoints.p", "must be a number") from None
        tol = data.get("tolerances", {})
        if not isinstance(tol, dict):
            raise ConfigError("tolerances", "must be an object")
        cfg.tol_mean = tol.get("mean", cfg.tol_mean)
        cfg.tol_freq = tol.get("frequency", cfg.tol_freq)
        cfg.format = data.get("format", cfg.format)
        cfg.out = data.get("out")
        cfg.seed = data.get("seed")
        cfg.counts = bool(data.get("counts", False))
        return cfg

    def schedule(self) -> list[int]:
        if self.checkpoints == "geometric":
            return st.geometric_checkpoints(self.max_n)
        ls, lstars = gen.checkpoints(self.p, self.n_max)
        # l_1 is always 0 (block 1 is empty); an empty prefix has no frequencies
        return sorted(q for q in set(ls + lstars) if q > 0)


def parse_tau(text: str) -> tuple[Fraction, ...]:
    try:
        return tuple(Fraction(part.strip()) for part in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise ConfigError("tau", f"cannot read {text!r} as comma-separated numbers") from None


def _fmt_verdict(label: str, v: st.LimitVerdict) -> str:
    state = "converged" if v.converged else "NOT converged"
    lo, hi = v.oscillation
    return f"{label:>4}: {state:<13} estimate={v.estimate:.6f} tail=[{lo:.6f}, {hi:.6f}] tol={v.tol}"


def cmd_stats(cfg: ExperimentConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    cfg.validate()
    try:
        x = dsl.resolve(cfg.expr, seed=cfg.seed)
        points = cfg.schedule()
    except (dsl.ResolveError, DomainError, OverflowError) as e:
        raise ConfigError("pipeline", str(e)) from None
    trace = st.run_stats(x, points)
    text = trace.to_csv(cfg.counts) if cfg.format == "csv" else trace.to_json(cfg.counts) + "\n"
    if cfg.out:
        try:
            Path(cfg.out).write_text(text)
        except OSError as e:
            raise IOError(f"cannot write {cfg.out}: {e}") from e
    else:
        stdout.write(text)
    summary = sys.stderr if not cfg.out else stdout
    print(f"# {x.name}: {len(trace)} checkpoints, last n = {trace.last().n}", file=summary)
    if len(trace) >= 4:
        print(_fmt_verdict("r", st.asymptotic_mean_verdict(trace, cfg.tol_mean)), file=summary)
        for i, v in enumerate(st.frequency_verdicts(trace, cfg.tol_freq)):
            print(_fmt_verdict(f"v{i}", v), file=summary)
    else:
        print("# fewer than 4 checkpoints: no verdicts", file=summary)
    return EXIT_OK


def cmd_dimension(tau, s: int | None, stdout=None) -> float:
    stdout = stdout or sys.stdout
    try:
        d = st.be_dimension(tau, s)
    except DomainError as e:
        raise ConfigError("tau", str(e)) from None
    print(f"{d:.6f}", file=stdout)
    return d


def cmd_verify(scale: str, criteria=None, out: str | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        results = verify.run_all(scale, criteria)
    except KeyError as e:
        raise ConfigError("criterion", str(e.args[0])) from None
    report = verify.report_json(results, scale)
    for r in results:
        print(r.line(), file=sys.stderr)
    if out:
        try:
            Path(out).write_text(report + "\n")
        except OSError as e:
            raise IOError(f"cannot write {out}: {e}") from e
    else:
        stdout.write(report + "\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sadic", description="s-adic digit streams, transforms and statistics")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("stats", help="run a pipeline and write its statistics trace")
    p.add_argument("--pipeline", help="pipeline expression, e.g. 'uniform(3,42) | seven'")
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--checkpoints", choices=("geometric", "paper-l"))
    p.add_argument("--max-n", type=int, help="last checkpoint of the geometric schedule")
    p.add_argument("--n-max", type=int, help="number of l_n / l*_n pairs for paper-l")
    p.add_argument("--p", type=Fraction, help="block exponent for paper-l checkpoints")
    p.add_argument("--tol", type=float, help="tolerance for every verdict")
    p.add_argument("--out", help="trace file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--seed", type=int, help="override the seed of the pipeline source")
    p.add_argument("--counts", action="store_true", help="include exact integer counts")

    p = sub.add_parser("dimension", help="Hausdorff dimension of a frequency class")
    p.add_argument("--tau", required=True, help="comma-separated frequencies, fractions allowed")
    p.add_argument("--s", type=int, default=None, help="radix (default: number of frequencies)")

    p = sub.add_parser("verify", help="run the reproduction battery")
    p.add_argument("--scale", choices=("small", "full"), default="small")
    p.add_argument("--criterion", action="append", help="criterion id or name (repeatable)")
    p.add_argument("--out", help="JSON report file (default: stdout)")
    return parser


def _stats_config(args) -> ExperimentConfig:
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except OSError as e:
            raise IOError(f"cannot read {args.config}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError("config", f"invalid JSON: {e}") from None
        cfg = ExperimentConfig.from_json(data)
    else:
        cfg = ExperimentConfig(pipeline=args.pipeline or "")
    if args.pipeline:
        cfg.pipeline = args.pipeline
    for attr in ("checkpoints", "max_n", "n_max", "p", "out", "format", "seed"):
        val = getattr(args, attr)
        if val is not None:
            setattr(cfg, attr, val)
    if args.tol is not None:
        cfg.tol_mean = cfg.tol_freq = args.tol
    cfg.counts = cfg.counts or args.counts
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        if args.command == "stats":
            return cmd_stats(_stats_config(args))
        if args.command == "dimension":
            cmd_dimension(parse_tau(args.tau), args.s)
            return EXIT_OK
        return cmd_verify(args.scale, args.criterion, args.out)
    except ConfigError as e:
        print(f"sadic: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (IOError, OSError) as e:
        print(f"sadic: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
