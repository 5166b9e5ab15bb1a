"""Command-line interface.

Thin dispatch over the harness: every subcommand parses flags into an
:class:`ExperimentConfig` (a ``--config`` JSON file supplies defaults,
flags win), runs the corresponding harness function, and writes CSV or
JSON-lines.  Exit codes: 0 success, 1 usage error, 2 data or format error,
3 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Sequence

from .dist import DistributionError
from .harness.bundles import resolve_environment
from .harness.config import ConfigError, ExperimentConfig
from .ingest import ChainFormatError, write_structured, write_tra
from .markov import InvalidParams, corrupt

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--rule", choices=("brier", "spherical"), default=None)
    p.add_argument("--format", dest="fmt", choices=("csv", "jsonl"), default=None)
    p.add_argument("--output", "-o", default=None, help="output path (default stdout)")


def build_parser() -> _Parser:
    parser = _Parser(prog="alignmon",
                     description="Alignment monitoring: anytime-valid interval "
                                 "estimates of a model's expected alignment score.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="expected-score sweep over a model parameter")
    _add_common(p)
    p.add_argument("--sweep-kind", choices=("mean", "sd"), default=None)
    p.add_argument("--sweep-lo", type=float, default=None)
    p.add_argument("--sweep-hi", type=float, default=None)
    p.add_argument("--sweep-points", type=int, default=None)

    p = sub.add_parser("monitor", help="run a monitor over a simulated environment")
    _add_common(p)
    p.add_argument("--env", dest="environment", default=None,
                   help="bundled chain name or .tra / structured file path")
    p.add_argument("--corruption", default=None,
                   help="model = corruption of the environment (default: none)")
    p.add_argument("--reference", choices=("environment", "expert", "gray", "black"),
                   default=None, help="reference model: switches to differential mode")

    p = sub.add_parser("stream", help="JSON-lines monitor on stdin/stdout")
    p.add_argument("--mode", choices=("average", "differential"), default="average")
    p.add_argument("--rule", choices=("brier", "spherical"), default="brier")
    p.add_argument("--delta", type=float, default=0.05)

    p = sub.add_parser("table", help="decision-time table over the bundled benchmarks")
    _add_common(p)
    p.add_argument("--benchmarks", nargs="+", default=None)
    p.add_argument("--corruptions", nargs="+", default=None)
    p.add_argument("--references", nargs="+", default=None)

    p = sub.add_parser("coverage", help="empirical any-step coverage study")
    _add_common(p)

    p = sub.add_parser("bench", help="per-iteration runtime benchmark")
    _add_common(p)
    p.add_argument("--sizes", type=int, nargs="+", default=None)
    p.add_argument("--iters", type=int, default=None)

    p = sub.add_parser("corrupt", help="read a chain, corrupt it, write it back out")
    p.add_argument("source", help="bundled chain name or file path")
    p.add_argument("--kind", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--param", action="append", default=[],
                   metavar="KEY=VALUE", help="corruption parameter, repeatable")
    p.add_argument("--format", dest="fmt", choices=("tra", "structured"), default="tra")
    p.add_argument("--output", "-o", default=None)

    p = sub.add_parser("serve", help="run the HTTP monitoring service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _config_from_args(args, extra: dict | None = None) -> ExperimentConfig:
    cfg = (ExperimentConfig.from_file(args.config)
           if getattr(args, "config", None) else ExperimentConfig())
    overrides = {
        "seed": args.seed, "delta": args.delta, "steps": args.steps,
        "runs": args.runs, "rule": args.rule, "fmt": args.fmt,
        "output": args.output,
    }
    if extra:
        overrides.update(extra)
    return cfg.merged(overrides)


def _emit(records: list[dict], cfg: ExperimentConfig) -> None:
    if cfg.fmt == "jsonl":
        text = "\n".join(json.dumps(r) for r in records) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(records[0].keys()))
        writer.writeheader()
        writer.writerows(records)
        text = buf.getvalue()
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_sweep(args) -> int:
    from .harness.experiments import run_sweep
    cfg = _config_from_args(args, {
        "scenario": "sweep", "sweep_kind": args.sweep_kind,
        "sweep_lo": args.sweep_lo, "sweep_hi": args.sweep_hi,
        "sweep_points": args.sweep_points,
    })
    _emit(run_sweep(cfg), cfg)
    return EXIT_OK


def _cmd_monitor(args) -> int:
    from .harness.experiments import run_monitoring
    scenario = "differential" if args.reference else "average"
    cfg = _config_from_args(args, {
        "scenario": scenario, "environment": args.environment,
        "corruption": args.corruption, "reference": args.reference,
        "fmt": args.fmt or "jsonl",
    })
    _emit(run_monitoring(cfg), cfg)
    return EXIT_OK


def _cmd_stream(args) -> int:
    from .harness.stream import stream_monitor
    return stream_monitor(sys.stdin, sys.stdout, sys.stderr, mode=args.mode,
                          rule_name=args.rule, delta=args.delta)


def _cmd_table(args) -> int:
    from .harness.experiments import run_decision_table
    cfg = _config_from_args(args, {"scenario": "differential"})
    kwargs = {}
    if args.benchmarks:
        kwargs["benchmarks"] = tuple(args.benchmarks)
    if args.corruptions:
        kwargs["corruptions"] = tuple(args.corruptions)
    if args.references:
        kwargs["references"] = tuple(args.references)
    records, summary = run_decision_table(cfg, **kwargs)
    _emit([r.__dict__ for r in records], cfg)
    width = max(len(s["benchmark"]) for s in summary)
    for s in summary:
        sym = {"top": "T", "bot": "_|_", "undecided": "?", "mixed": "!"}[s["decision"]]
        sys.stderr.write(
            f"{s['benchmark']:{width}s} {s['corruption']:15s} {s['reference']:12s} "
            f"{s['mean_steps']:7.1f} +/- {s['std_steps']:6.2f}  ({sym})\n")
    return EXIT_OK


def _cmd_coverage(args) -> int:
    from .harness.experiments import run_coverage
    cfg = _config_from_args(args, {"scenario": "coverage", "delta": args.delta or 0.1,
                                   "runs": args.runs or 300})
    _emit(run_coverage(cfg), cfg)
    return EXIT_OK


def _cmd_bench(args) -> int:
    from .harness.bench import run_bench
    extra = {"scenario": "bench"}
    if args.sizes:
        extra["bench_sizes"] = tuple(args.sizes)
    if args.iters:
        extra["bench_iters"] = args.iters
    cfg = _config_from_args(args, extra)
    _emit(run_bench(cfg), cfg)
    return EXIT_OK


def _parse_params(pairs: Sequence[str]) -> dict[str, float]:
    params = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--param needs KEY=VALUE, got {pair!r}")
        key, _, value = pair.partition("=")
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"--param value must be numeric, got {pair!r}") from None
    return params


def _cmd_corrupt(args) -> int:
    chain = resolve_environment(args.source)
    out_chain = corrupt(chain, args.kind, seed=args.seed, **_parse_params(args.param))
    text = (write_structured(out_chain) if args.fmt == "structured"
            else write_tra(out_chain))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_serve(args) -> int:
    try:
        import uvicorn
    except ImportError:
        sys.stderr.write("the serve command needs uvicorn "
                         "(pip install alignmon[server])\n")
        return EXIT_USAGE
    from .service.app import create_app
    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


_COMMANDS = {
    "sweep": _cmd_sweep,
    "monitor": _cmd_monitor,
    "stream": _cmd_stream,
    "table": _cmd_table,
    "coverage": _cmd_coverage,
    "bench": _cmd_bench,
    "corrupt": _cmd_corrupt,
    "serve": _cmd_serve,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        sys.stderr.write(f"alignmon: {exc}\n")
        return EXIT_USAGE
    except (ChainFormatError, DistributionError, InvalidParams, FileNotFoundError,
            KeyError) as exc:
        sys.stderr.write(f"alignmon: {exc}\n")
        return EXIT_DATA
    except ValueError as exc:
        sys.stderr.write(f"alignmon: {exc}\n")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
