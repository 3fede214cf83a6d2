"""Run every preset and write its CSV/JSON output under one directory.

    python3 scripts/reproduce_all.py [--out out] [--only fig4 fig6]
"""

import argparse
import time
from pathlib import Path

from openheis.experiments import run_experiment
from openheis.presets import PRESETS


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="out")
    parser.add_argument("--only", nargs="*", default=None)
    args = parser.parse_args()
    ids = args.only or list(PRESETS)
    for pid in ids:
        start = time.perf_counter()
        summary = run_experiment(PRESETS[pid].config(), Path(args.out) / pid)
        paths = sorted({run["solver_path"] for run in summary["runs"]})
        print(f"{pid:<14} {len(summary['runs'])} run(s)  solver={','.join(paths)}  {time.perf_counter() - start:6.1f}s")


if __name__ == "__main__":
    main()
