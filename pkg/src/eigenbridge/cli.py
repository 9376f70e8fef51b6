"""Command line front end: one subcommand per experiment.

Examples
--------
eigenbridge haar-bridge --n 1024 --m 2 --field complex --reps 2000 --seed 0x2a --out runs/haar
eigenbridge cov-bridge --n 512 --s 1024 --law rademacher --reps 1000 --seed 7 --out runs/cov
eigenbridge config my_run.json
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import EigenbridgeError
from .harness import EXPERIMENTS, ExperimentConfig, run_experiment


def _parse_seed(text: str) -> int:
    try:
        return int(text, 0)  # accepts decimal and 0x-prefixed hex
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad seed {text!r}: {exc}") from exc


def _default_threads() -> int:
    env = os.environ.get("EIGENBRIDGE_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True, help="matrix dimension")
    p.add_argument("--s", type=int, default=None, help="sample count for covariance models")
    p.add_argument("--m", type=int, default=2, help="number of test directions")
    p.add_argument("--field", choices=("real", "complex"), default=None,
                   help="scalar field (default: complex for haar-bridge, else real)")
    p.add_argument("--law", default="gaussian",
                   help="entry law: gaussian, complex-gaussian, rademacher, two-point[:SCALE]")
    p.add_argument("--theta", type=float, default=None, help="rank-one perturbation strength")
    p.add_argument("--y", dest="y_override", type=float, default=None,
                   help="override the aspect ratio n/s for reference laws")
    p.add_argument("--reps", type=int, default=1, help="replicate count")
    p.add_argument("--seed", type=_parse_seed, default=0,
                   help="master seed, decimal or 0x-hex")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: EIGENBRIDGE_THREADS or 1)")


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    threads = args.threads if args.threads is not None else _default_threads()
    return ExperimentConfig(
        experiment=args.experiment,
        n=args.n,
        s=args.s,
        m=args.m,
        field=args.field,
        law=args.law,
        theta=args.theta,
        y_override=args.y_override,
        replicates=args.reps,
        master_seed=args.seed,
        output_path=args.out,
        thread_count=threads,
    )


def _config_from_json(path: str) -> ExperimentConfig:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise EigenbridgeError("config file must hold a single JSON object")
    allowed = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(data) - allowed
    if unknown:
        raise EigenbridgeError(f"unknown config keys: {sorted(unknown)}")
    if "thread_count" not in data:
        data["thread_count"] = _default_threads()
    return ExperimentConfig(**data)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eigenbridge",
        description="Replicated random-matrix eigenvector experiments.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        _add_experiment_flags(p)
    cfg = sub.add_parser("config", help="run from a JSON config file")
    cfg.add_argument("path", help="path to a JSON document mirroring ExperimentConfig")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.experiment == "config":
            cfg = _config_from_json(args.path)
        else:
            cfg = _config_from_args(args)
        reports, outputs = run_experiment(cfg)
    except EigenbridgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    failed = 0
    for r in reports:
        tag = "PASS" if r.passed else "FAIL"
        failed += 0 if r.passed else 1
        print(f"[{tag}] {r.name}: statistic={r.statistic:.6g} threshold={r.threshold:.6g}")
    for path in outputs:
        print(f"wrote {path}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
