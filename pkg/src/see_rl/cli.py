"""Command-line experiment harness.

Subcommands:

* ``train --config F --seed N --out DIR`` -- one run; writes
  ``seed_<N>.csv`` (header ``step,metric,value,seed``), a resolved-config
  JSON sidecar, and final parameter snapshots.
* ``sweep --config F --seeds K --out DIR`` -- K runs on consecutive seeds
  (optionally in parallel worker processes) plus ``aggregate.csv`` with
  per-step mean and standard error of the evaluation metrics.
* ``ablate --config F --out DIR`` -- the four variants (full method and
  the three component removals) as subdirectory-labeled sweeps.
* ``evaluate --snapshot F`` -- load exploitation parameters and report the
  greedy mean return over fresh episodes.

Exit codes: 0 success, 1 usage/config error, 2 training divergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import multiprocessing
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import load_config, normalized_score, resolve_config, resolved_to_dict
from .errors import ConfigurationError, DivergenceError
from .exploit import ExploitationAgent
from .trainer import ABLATIONS, MetricsRecord, evaluate, train

CSV_HEADER = ("step", "metric", "value", "seed")
EVAL_METRICS = ("eval_return_mean", "eval_return_norm")


def _fmt(value: float) -> str:
    return repr(float(value))


def records_to_rows(records: list[MetricsRecord], env: str, seed: int):
    for rec in records:
        for metric, value in rec.values.items():
            yield (rec.step, metric, value, seed)
        if rec.kind == "evaluation":
            yield (rec.step, "eval_return_norm",
                   normalized_score(env, rec.values["eval_return_mean"]), seed)


def write_curve_files(out_dir: Path, result) -> Path:
    """Write the per-seed CSV, config sidecar, and parameter snapshots."""
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = result.config.seed
    csv_path = out_dir / f"seed_{seed}.csv"
    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_HEADER)
        for step, metric, value, s in records_to_rows(result.records, result.config.env, seed):
            writer.writerow((step, metric, _fmt(value), s))
    with open(out_dir / f"seed_{seed}_config.json", "w") as f:
        json.dump(resolved_to_dict(result.config), f, indent=2, sort_keys=True)
        f.write("\n")
    result.exploit.save(out_dir / f"seed_{seed}_theta.bin", {"env": result.config.env})
    if result.explore is not None:
        result.explore.save(out_dir / f"seed_{seed}_omega.bin", {"env": result.config.env})
    return csv_path


def read_curve_rows(path) -> list[tuple[int, str, float, int]]:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ConfigurationError(f"{path}: unexpected CSV header {header}")
        return [(int(r[0]), r[1], float(r[2]), int(r[3])) for r in reader]


def write_aggregate(out_dir: Path, csv_paths: list[Path]) -> Path:
    """Mean and standard error per (step, metric) across seeds.

    Covers the evaluation metrics, which land on a shared step grid in
    every run; per-episode training metrics stay in the per-seed files.
    """
    groups: dict[tuple[int, str], list[float]] = {}
    for path in csv_paths:
        for step, metric, value, _ in read_curve_rows(path):
            if metric in EVAL_METRICS:
                groups.setdefault((step, metric), []).append(value)
    agg_path = out_dir / "aggregate.csv"
    with open(agg_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(("step", "metric", "mean", "stderr", "n_seeds"))
        for (step, metric), values in sorted(groups.items()):
            arr = np.asarray(values, dtype=np.float64)
            stderr = float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else 0.0
            writer.writerow((step, metric, _fmt(arr.mean()), _fmt(stderr), len(arr)))
    return agg_path


def _run_one(raw_config: dict, seed: int, out_dir: str) -> str:
    config = resolve_config(raw_config, seed=seed, out_dir=out_dir)
    result = train(config)
    return str(write_curve_files(Path(out_dir), result))


def run_sweep(raw_config: dict, seeds: list[int], out_dir: Path, workers: int = 1) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    if workers > 1 and len(seeds) > 1:
        # spawned workers pick the env var up at interpreter start, keeping
        # BLAS single-threaded per worker (no oversubscription)
        os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
        os.environ.setdefault("OMP_NUM_THREADS", "1")
        context = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=min(workers, len(seeds)), mp_context=context) as pool:
            futures = [pool.submit(_run_one, raw_config, s, str(out_dir)) for s in seeds]
            paths = [Path(f.result()) for f in futures]
    else:
        paths = [Path(_run_one(raw_config, s, str(out_dir))) for s in seeds]
    write_aggregate(out_dir, paths)
    return paths


def cmd_train(args) -> int:
    config = resolve_config(load_config(args.config), seed=args.seed, out_dir=args.out)
    result = train(config)
    path = write_curve_files(Path(args.out), result)
    final_eval = [r for r in result.records if r.kind == "evaluation"]
    if final_eval:
        last = final_eval[-1]
        print(f"final evaluation at step {last.step}: "
              f"mean return {last.values['eval_return_mean']:.3f}")
    print(f"wrote {path}")
    return 0


def cmd_sweep(args) -> int:
    raw = load_config(args.config)
    seeds = [args.base_seed + k for k in range(args.seeds)]
    paths = run_sweep(raw, seeds, Path(args.out), workers=args.workers)
    print(f"wrote {len(paths)} per-seed curve files and {Path(args.out) / 'aggregate.csv'}")
    return 0


def cmd_ablate(args) -> int:
    raw = load_config(args.config)
    if raw.get("algorithm") != "see":
        raise ConfigurationError("ablate needs a 'see' config")
    if args.steps is not None:
        raw["total_steps"] = args.steps
    out = Path(args.out)
    manifest = {}
    for variant in ABLATIONS:
        label = "see" if variant == "none" else variant
        variant_raw = dict(raw)
        variant_raw["ablation"] = variant
        variant_dir = out / label
        seeds = [args.base_seed + k for k in range(args.seeds)]
        run_sweep(variant_raw, seeds, variant_dir, workers=args.workers)
        manifest[label] = str(variant_dir)
        print(f"ablation variant {label}: wrote {variant_dir}")
    with open(out / "ablation_manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return 0


def cmd_evaluate(args) -> int:
    agent = ExploitationAgent.load(args.snapshot)
    env = args.env or agent.loaded_metadata.get("env")
    if not env:
        raise ConfigurationError("snapshot has no env metadata; pass --env")
    mean, returns = evaluate(agent, env, episodes=args.episodes, seed=args.seed)
    print(f"greedy evaluation on {env} over {args.episodes} episodes")
    print(f"per-episode returns: {[round(r, 3) for r in returns]}")
    print(f"mean return: {mean:.3f} (normalized {normalized_score(env, mean):.2f})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="see-rl", description="error-seeking exploration experiment harness"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="run one experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="run several seeds and aggregate")
    p.add_argument("--config", required=True)
    p.add_argument("--seeds", type=int, required=True)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ablate", help="run the four method variants")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("evaluate", help="greedy evaluation of a saved snapshot")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--env", default=None)
    p.add_argument("--episodes", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_evaluate)
    return parser


def _limit_blas_threads() -> None:
    # the workload is many small matmuls interleaved with elementwise ops;
    # multithreaded BLAS spin-waits starve the main thread on small boxes
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(1)
    except ImportError:
        os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
        os.environ.setdefault("OMP_NUM_THREADS", "1")


def main(argv=None) -> int:
    parser = build_parser()
    _limit_blas_threads()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DivergenceError as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
