#!/usr/bin/env python3
"""Parameter-plane overview for the linear model at T = 1.9.

Writes two CSVs: a (d, 1/A) sweep colored by period/branch and the
border-collision curves A0, AnR, AnL, AnC for overlay plotting.
"""
import argparse
import json
import subprocess
import sys
import tempfile
from pathlib import Path

CONFIG = {
    "model": {"family": "linear", "params": [-1.0, 0.5]},
    "forcing": {"A": 1.0, "d": 0.5, "T": 1.9},
    "theta": 1.0,
    "sweep": {"d_range": [0.02, 0.98], "invA_range": [0.02, 2.0],
              "resolution": 150, "period_cap": 20},
    "curves": {"d_min": 0.05, "d_max": 0.95, "points": 60, "n_max": 3},
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="results", type=Path)
    parser.add_argument("--resolution", default=150, type=int)
    parser.add_argument("--workers", default=None, type=int)
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    CONFIG["sweep"]["resolution"] = args.resolution
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(CONFIG, fh)
        cfg_path = fh.name

    base = [sys.executable, "-m", "strobomap.cli"]
    workers = [] if args.workers is None else ["--workers", str(args.workers)]
    subprocess.run(base + ["sweep", "--config", cfg_path, *workers,
                           "--out", str(args.out_dir / "linear_sweep.csv")],
                   check=True)
    subprocess.run(base + ["curves", "--config", cfg_path,
                           "--out", str(args.out_dir / "linear_curves.csv")],
                   check=True)
    print(f"wrote {args.out_dir}/linear_sweep.csv and linear_curves.csv")


if __name__ == "__main__":
    main()
