"""Command-line entry point: run / sweep / probe / summarize.

Exit codes: 0 success, 2 configuration or usage error, 3 I/O error,
1 partial sweep failure (completed runs are kept).
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import ConfigError, ExperimentConfig, load_config, run_config_digest
from .harness import (
    RunRecord,
    run_experiment,
    summarize,
    write_run_csv,
    write_summary_csv,
    read_run_csv,
)
from .probe import emit_probe_csv
from .relabel import ReplayStrategy

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2
EXIT_IO = 3


def _run_dir(out: Path, digest: str) -> Path:
    return out / "runs" / digest


def _write_meta(cfg: ExperimentConfig, strategy: ReplayStrategy, run_dir: Path) -> None:
    env = cfg.make_env()
    meta = {
        "config_hash": run_config_digest(cfg, strategy),
        "strategy": strategy.label(),
        "env": env.label(),
        "agent": cfg.agent_name,
        "threshold": cfg.summary_threshold,
    }
    (run_dir / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _execute_run(
    cfg: ExperimentConfig, strategy: ReplayStrategy, seed: int, out: Path, with_probe: bool = False
) -> Path:
    record, snapshots = run_experiment(cfg, seed, strategy, with_probe=with_probe)
    run_dir = _run_dir(out, record.config_hash)
    run_dir.mkdir(parents=True, exist_ok=True)
    _write_meta(cfg, strategy, run_dir)
    csv_path = run_dir / f"{seed}.csv"
    write_run_csv(record, csv_path)
    if with_probe:
        probe_dir = out / "probe" / record.config_hash
        probe_dir.mkdir(parents=True, exist_ok=True)
        emit_probe_csv(cfg.make_env(), snapshots, probe_dir / f"{seed}.csv")
    return csv_path


def _sweep_worker(args: tuple) -> tuple[str, int]:
    cfg, strategy, seed, out = args
    _execute_run(cfg, strategy, seed, Path(out))
    return strategy.label(), seed


def cmd_run(config_path: str, seed: int | None, out_dir: str) -> int:
    try:
        cfg = load_config(config_path)
        if len(cfg.strategies) != 1:
            raise ConfigError("strategy", "run expects exactly one strategy; use sweep for lists")
        use_seed = cfg.seeds[0] if seed is None else seed
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        path = _execute_run(cfg, cfg.strategies[0], use_seed, Path(out_dir))
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(path)
    return EXIT_OK


def cmd_sweep(config_path: str, out_dir: str, jobs: int) -> int:
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(out_dir)
    tasks = [(cfg, strategy, seed, str(out)) for strategy in cfg.strategies for seed in cfg.seeds]
    failures = []
    try:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for task, result in zip(tasks, pool.map(_sweep_worker_safe, tasks)):
                    if isinstance(result, str):
                        failures.append((task[1].label(), task[2], result))
        else:
            for task in tasks:
                result = _sweep_worker_safe(task)
                if isinstance(result, str):
                    failures.append((task[1].label(), task[2], result))
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    for label, seed, message in failures:
        print(f"run failed: strategy={label} seed={seed}: {message}", file=sys.stderr)
    if failures:
        return EXIT_PARTIAL
    try:
        _summarize_from_disk(cfg, out)
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(out / "summary.csv")
    return EXIT_OK


def _sweep_worker_safe(args: tuple):
    try:
        return _sweep_worker(args)
    except Exception as exc:  # keep sibling runs alive on a bad run
        return f"{type(exc).__name__}: {exc}"


def _summarize_from_disk(cfg: ExperimentConfig, out: Path) -> None:
    """Rebuild the summary from the on-disk CSVs so it is scheduler-independent."""
    rows = []
    for strategy in cfg.strategies:
        digest = run_config_digest(cfg, strategy)
        run_dir = _run_dir(out, digest)
        runs = []
        for seed in sorted(cfg.seeds):
            curve = read_run_csv(run_dir / f"{seed}.csv")
            runs.append(RunRecord(digest, seed, curve, 0.0))
        summary = summarize(runs, cfg.summary_threshold, strategy.label())
        env = cfg.make_env()
        rows.append(
            {"strategy": strategy.label(), "env": env.label(), "agent": cfg.agent_name, "summary": summary}
        )
    write_summary_csv(rows, out / "summary.csv")


def cmd_probe(config_path: str, seed: int | None, out_dir: str) -> int:
    try:
        cfg = load_config(config_path)
        if cfg.probe is None:
            raise ConfigError("probe", "missing probe section required by the probe command")
        if len(cfg.strategies) != 1:
            raise ConfigError("strategy", "probe expects exactly one strategy")
        use_seed = cfg.seeds[0] if seed is None else seed
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        _execute_run(cfg, cfg.strategies[0], use_seed, Path(out_dir), with_probe=True)
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    digest = run_config_digest(cfg, cfg.strategies[0])
    print(Path(out_dir) / "probe" / digest / f"{use_seed}.csv")
    return EXIT_OK


def cmd_summarize(out_dir: str) -> int:
    """Recompute summary.csv from the run CSVs and meta files under out_dir."""
    out = Path(out_dir)
    runs_root = out / "runs"
    if not runs_root.is_dir():
        print(f"error: no runs directory under {out}", file=sys.stderr)
        return EXIT_CONFIG
    rows = []
    try:
        for run_dir in sorted(runs_root.iterdir()):
            meta_path = run_dir / "meta.json"
            if not meta_path.is_file():
                continue
            meta = json.loads(meta_path.read_text())
            runs = []
            for csv_path in sorted(run_dir.glob("*.csv"), key=lambda p: int(p.stem)):
                curve = read_run_csv(csv_path)
                runs.append(RunRecord(meta["config_hash"], int(csv_path.stem), curve, 0.0))
            if not runs:
                continue
            summary = summarize(runs, meta["threshold"], meta["strategy"])
            rows.append(
                {
                    "strategy": meta["strategy"],
                    "env": meta["env"],
                    "agent": meta["agent"],
                    "summary": summary,
                }
            )
        if not rows:
            print(f"error: no completed runs under {runs_root}", file=sys.stderr)
            return EXIT_CONFIG
        write_summary_csv(rows, out / "summary.csv")
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(out / "summary.csv")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="herlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="train one (config, seed) run and write its CSV")
    run_p.add_argument("--config", required=True)
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--out", required=True)

    sweep_p = sub.add_parser("sweep", help="run every strategy x seed and write summary.csv")
    sweep_p.add_argument("--config", required=True)
    sweep_p.add_argument("--out", required=True)
    sweep_p.add_argument("--jobs", type=int, default=1)

    probe_p = sub.add_parser("probe", help="train with periodic value-surface snapshots")
    probe_p.add_argument("--config", required=True)
    probe_p.add_argument("--seed", type=int, default=None)
    probe_p.add_argument("--out", required=True)

    sum_p = sub.add_parser("summarize", help="recompute summary.csv from existing run CSVs")
    sum_p.add_argument("--out", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.seed, args.out)
    if args.command == "sweep":
        if args.jobs < 1:
            print("error: --jobs must be >= 1", file=sys.stderr)
            return EXIT_CONFIG
        return cmd_sweep(args.config, args.out, args.jobs)
    if args.command == "probe":
        return cmd_probe(args.config, args.seed, args.out)
    if args.command == "summarize":
        return cmd_summarize(args.out)
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
