"""Command line interface.

Subcommands:
  run         train the configured methods on the synthetic benchmark and
              write summary/curves/weights CSVs, the resolved config, and
              figures into the output directory
  gen-data    draw one synthetic dataset and write it as CSV
  bias-score  report the per-class informativeness of one feature of a CSV

Exit codes: 0 success, 2 configuration error, 3 training diverged, 4 I/O.
"""

from __future__ import annotations

import argparse
import sys

from . import harness
from .harness import ConfigError
from .synthdata import (
    DegenerateFeatureError,
    GeneratorConfig,
    bias_score,
    generate,
    load_csv,
    save_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="classeq", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="train and write results")
    run.add_argument("--config", help="flat key=value config file (defaults apply if omitted)")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seeds", type=int, help="override the number of seeds")
    run.add_argument("--method", help="override the method list, e.g. erm or erm,cls_unbias")
    run.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    gen = sub.add_parser("gen-data", help="write one synthetic dataset as CSV")
    gen.add_argument("--role", required=True, choices=("train", "test1", "test2"))
    gen.add_argument("--n", required=True, type=int)
    gen.add_argument("--pos-prior", required=True, type=float)
    gen.add_argument("--seed", required=True, type=int)
    gen.add_argument("--out", required=True)

    bias = sub.add_parser("bias-score", help="per-class informativeness of a feature")
    bias.add_argument("--data", required=True, help="CSV with header f1,f2,label")
    bias.add_argument("--feature", required=True, type=int, choices=(0, 1))
    bias.add_argument("--bins", type=int, default=20)
    return parser


def _cmd_run(args) -> int:
    try:
        overrides = {}
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                overrides = harness.parse_config(fh.read())
        resolved = harness.resolve_config(overrides)
        methods = None
        if args.method:
            methods = [m.strip() for m in args.method.split(",") if m.strip()]
        result = harness.run_experiment(resolved, methods=methods, n_seeds=args.seeds)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO

    for method, agg in result.methods.items():
        if not agg.records:
            print(f"error: every {method} run diverged "
                  f"(seeds {agg.diverged_seeds})", file=sys.stderr)
            return EXIT_DIVERGED
        if agg.diverged_seeds:
            print(f"warning: {method} diverged on seed indices {agg.diverged_seeds}; "
                  f"excluded from aggregates", file=sys.stderr)

    try:
        written = harness.emit(result, args.out)
        if not args.no_figures and harness._as_bool("figures", result.config["figures"]):
            written += harness.emit_figures(result, args.out)
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO
    for path in written:
        print(path)
    return EXIT_OK


def _cmd_gen_data(args) -> int:
    try:
        cfg = GeneratorConfig(role=args.role, n=args.n, pos_prior=args.pos_prior, seed=args.seed)
        ds = generate(cfg)
    except ValueError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        save_csv(ds, args.out)
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO
    print(args.out)
    return EXIT_OK


def _cmd_bias_score(args) -> int:
    try:
        ds = load_csv(args.data)
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO
    except ValueError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = bias_score(ds, args.feature, args.bins)
    except (DegenerateFeatureError, ValueError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"feature={report.feature_index} bins={report.bins} "
          f"pos={report.pos_score:.6f} neg={report.neg_score:.6f}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "gen-data":
        return _cmd_gen_data(args)
    return _cmd_bias_score(args)


if __name__ == "__main__":
    raise SystemExit(main())
