#!/usr/bin/env python3
"""Devil's staircase across the first adding window of the linear model.

Scans the segment between the A0 and A1R collision curves at fixed duty
cycle, prints the plateau table and the concatenation-law report, and writes
the per-point series as CSV.
"""
import argparse
from pathlib import Path

from strobomap import (ForcingParams, SystemParams, VectorFieldSpec,
                       adding_check, scan_1d, staircase, window_path)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--d", type=float, default=0.5)
    parser.add_argument("--steps", type=int, default=2001)
    parser.add_argument("--depth", type=int, default=3)
    parser.add_argument("--out", type=Path, default=Path("staircase.csv"))
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    template = SystemParams(
        field=VectorFieldSpec.linear(-1.0, 0.5),
        forcing=ForcingParams(A=1.0, d=args.d, T=1.9))
    path = window_path(template, 0, args.d)
    series = scan_1d(template, path, args.steps, workers=args.workers,
                     window_span=True)

    plateaus = staircase(series)
    print(f"{len(plateaus)} plateaus:")
    for p in plateaus:
        print(f"  rho={str(p.rho):>6}  word={p.word or '?':<12} "
              f"lambda in [{p.lam_lo:.6f}, {p.lam_hi:.6f}]  ({p.n_points} pts)")

    if args.depth > 0:
        def refine(lo, hi, steps):
            return scan_1d(template, path, steps, lam_lo=lo, lam_hi=hi,
                           workers=args.workers)
        report = adding_check(series, refine, depth=args.depth)
        print(f"adding law: {len(report.verified)} concatenations verified, "
              f"{report.pairs_unresolved} below resolution, "
              f"{report.pairs_skipped} skipped")

    with open(args.out, "w") as fh:
        fh.write("lambda,d,invA,eta_num,eta_den,period,word,status\n")
        for p in series.points:
            eta = p.eta
            fh.write(f"{p.lam!r},{p.d!r},{p.invA!r},"
                     f"{'' if eta is None else eta.numerator},"
                     f"{'' if eta is None else eta.denominator},"
                     f"{p.period or ''},{p.word or ''},{p.status}\n")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
