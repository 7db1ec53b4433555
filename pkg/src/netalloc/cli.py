"""Command-line harness.

Subcommands map onto the pipeline stages; `run` chains all of them and writes
the manifest. Exit codes: 0 success, 1 config error, 2 runtime failure. The
worker count for arm-level parallelism comes from the NETALLOC_WORKERS
environment variable (default 1).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from .config import ExperimentConfig
from .errors import ConfigError, NetallocError
from .experiment import (
    run_experiment,
    stage_allocate,
    stage_evaluate,
    stage_generate,
    stage_report,
    stage_train,
)

STAGES = {
    "generate": lambda cfg: stage_generate(cfg),
    "train": lambda cfg: stage_train(cfg),
    "allocate": lambda cfg: stage_allocate(cfg),
    "evaluate": lambda cfg: stage_evaluate(cfg),
    "report": lambda cfg: stage_report(cfg),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netalloc",
        description="Generate interference data, train estimators, optimize "
                    "budgeted treatment allocations, and score them against "
                    "ground truth.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("run", "run the full pipeline and write a manifest"),
        ("generate", "sample networks, features, treatments, and outcomes"),
        ("train", "fit estimator grids and select by validation BCE"),
        ("allocate", "run every configured method on the test networks"),
        ("evaluate", "score stored allocations against the oracle"),
        ("report", "emit plot-ready CSV summaries"),
    ]:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("-c", "--config", required=True,
                         help="path to the YAML experiment config")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        raw = yaml.safe_load(Path(args.config).read_text(encoding="utf-8"))
        cfg = ExperimentConfig.from_yaml(args.config)
    except FileNotFoundError:
        print(f"error: config file not found: {args.config}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except yaml.YAMLError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.command == "run":
            manifest = run_experiment(cfg, raw_config=raw)
            failed = manifest["failures"]
            print(f"run complete: {len(manifest['files'])} artifacts in "
                  f"{cfg.output_dir}"
                  + (f"; {len(failed)} method failure(s)" if failed else ""))
        else:
            STAGES[args.command](cfg)
            print(f"{args.command} complete: artifacts in {cfg.output_dir}")
    except NetallocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # unexpected runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
