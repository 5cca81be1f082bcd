#!/usr/bin/env python3
"""Run a Monte-Carlo comparison from a JSON config and print the aggregate table.

    python scripts/run_experiment.py configs/desk.json
    python scripts/run_experiment.py configs/reference_highs.json --workers 8
"""
import argparse
import time
from dataclasses import replace
from pathlib import Path

from greencell.harness import emit_csv, load_config, run_experiment, summary_table

parser = argparse.ArgumentParser()
parser.add_argument("config")
parser.add_argument("--workers", type=int)
parser.add_argument("--trials", type=int)
args = parser.parse_args()

config = load_config(args.config)
if args.workers:
    config = replace(config, workers=args.workers)
if args.trials:
    config = replace(config, trials=args.trials)

t0 = time.perf_counter()
report = run_experiment(config)
elapsed = time.perf_counter() - t0
if config.output:
    Path(config.output).parent.mkdir(parents=True, exist_ok=True)
    emit_csv(report, config.output)
    print(f"wrote {config.output}")
print(summary_table(report))
print(f"{config.trials} trials in {elapsed:.1f} s")
