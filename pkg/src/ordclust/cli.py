"""Command line entry point.

    ordclust run --algorithm kcenter-2k --generate random --n 30 --k 5 --trials 100 --out runs.csv
    ordclust facility --generate random --n 12 --f 2 --trials 2000
    ordclust generate tree --k 6 --seed 3 --out tree.json
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import adversarial
from .experiment import (
    ALGORITHMS,
    FAMILIES,
    BatchConfig,
    ConfigError,
    records_to_csv,
    run_batch,
    summarize,
    traces_to_jsonl,
)
from .metric import parse_objective


def _objective(value: str) -> float:
    try:
        return parse_objective(value)
    except (KeyError, ValueError) as exc:
        raise argparse.ArgumentTypeError(f"invalid objective {value!r}") from exc


def _param(value: str) -> tuple[str, float]:
    key, sep, raw = value.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError("expected NAME=VALUE")
    num = float(raw)
    return key, int(num) if num.is_integer() and key in ("k", "n", "s", "alpha", "n_prime") else num


def _add_batch_args(p: argparse.ArgumentParser, facility: bool) -> None:
    if not facility:
        p.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--instance", help="instance JSON file")
    src.add_argument("--generate", choices=FAMILIES, help="draw a fresh instance per trial")
    p.add_argument("--n", type=int, default=30, help="points for generated instances")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--z", type=_objective, default=1.0, help="exponent or kcenter/kmedian/kmeans")
    p.add_argument("--f", type=float, default=1.0, help="facility opening cost")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--T", type=int, default=None, help="sampling rounds for kz-lowquery")
    p.add_argument("--augment", choices=("zero", "2k"), default="zero")
    p.add_argument("--rings-log-base", type=float, default=2.0)
    p.add_argument("--param", type=_param, action="append", default=[],
                   help="generator field, e.g. --param alpha=3 (repeatable)")
    p.add_argument("--oracle", choices=("auto", "skip"), default="auto")
    p.add_argument("--threshold", type=float, default=None, help="distortion counted as success")
    p.add_argument("--timing", action="store_true", help="fill the wall_time column")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--summary", help="JSON summary path (default stderr)")
    p.add_argument("--trace", help="JSONL trace path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ordclust", description="Clustering from rankings plus few distance queries.")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_batch_args(sub.add_parser("run", help="run an algorithm over seeded trials"), facility=False)
    _add_batch_args(sub.add_parser("facility", help="online facility location trials"), facility=True)
    gen = sub.add_parser("generate", help="write a lower-bound instance and its descriptor")
    gen.add_argument("family", choices=tuple(adversarial.GENERATORS))
    gen.add_argument("--k", type=int)
    gen.add_argument("--n", type=int)
    gen.add_argument("--s", type=int)
    gen.add_argument("--alpha", type=int)
    gen.add_argument("--n-prime", type=int)
    gen.add_argument("--D", type=float)
    gen.add_argument("--N", type=float)
    gen.add_argument("--eps", type=float)
    gen.add_argument("--f", type=float)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    return parser


def _config(args) -> BatchConfig:
    return BatchConfig(
        algorithm=getattr(args, "algorithm", "meyerson"),
        k=args.k, z=args.z, f=args.f, trials=args.trials, seed=args.seed,
        instance=args.instance, generate=args.generate, n=args.n, T=args.T,
        oracle=args.oracle, augment=args.augment, rings_log_base=args.rings_log_base,
        threshold=args.threshold, timing=args.timing, jobs=args.jobs,
        trace=args.trace is not None, family_params=dict(args.param),
    )


def _run(args) -> int:
    config = _config(args)
    records, traces = run_batch(config)
    text = records_to_csv(records)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    summary = json.dumps(summarize(records, config.threshold), indent=2)
    if args.summary:
        Path(args.summary).write_text(summary + "\n")
    else:
        print(summary, file=sys.stderr)
    if args.trace:
        Path(args.trace).write_text(traces_to_jsonl(records, traces))
    return 0


def _generate(args) -> int:
    spec_cls, gen = adversarial.GENERATORS[args.family]
    names = {f for f in spec_cls.__dataclass_fields__}
    given = {"n_prime": args.n_prime}
    given.update({k: getattr(args, k) for k in ("k", "n", "s", "alpha", "D", "N", "eps", "f")})
    params = {k: v for k, v in given.items() if v is not None}
    extra = set(params) - names
    if extra:
        raise ConfigError(f"{args.family} does not take {', '.join(sorted(extra))}")
    try:
        spec = spec_cls(**params)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    instance, profile, descriptor = gen(spec, np.random.default_rng(args.seed))
    sidecar = adversarial.write_generated(instance, profile, descriptor, args.out)
    print(f"wrote {args.out} ({instance.n} points) and {sidecar}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            return _generate(args)
        return _run(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
