#!/usr/bin/env python3
"""Discretization refinement study in the superfluid regime.

Desk scale finishes in ~30 min on one core; the paper-scale probe
(512 x 512, t = 2000, plus its refinements) runs for many hours and is the
configuration where deviations below 1e-4 for dt/2 and dx/2 are expected.

    python scripts/convergence_report.py --preset desk --t-end 400
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from polturb import DisorderSpec, ModelParams, PumpSpec
from polturb.fieldio import write_metadata
from polturb.sweep import apply_preset, convergence_harness


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--preset", choices=("desk", "paper"), default="desk")
    ap.add_argument("--f-inc", type=float, default=3.7)
    ap.add_argument("--t-end", type=float, default=None,
                    help="probe time (defaults to the preset duration)")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("out/convergence"))
    args = ap.parse_args()

    n, length, solver = apply_preset(args.preset)
    solver = replace(solver, precision="double")
    if args.t_end is not None:
        solver = replace(solver, t_end=args.t_end)

    report = convergence_harness(
        ModelParams(), PumpSpec(f_inc=args.f_inc), DisorderSpec(seed=args.seed),
        solver, n, length, refinements=("dt2", "dx2", "L2"), dt_ladder=True,
    )
    args.out.mkdir(parents=True, exist_ok=True)
    print(f"relative error at t={report.t_probe:g}, central 10x10 window:")
    for name, err in report.errors.items():
        print(f"  {name:>4}: {err:.3e}")
    print(f"  largest: {report.largest()}")
    print(f"  dt amplitude convergence ratio: {report.dt_ratio:.2f} (2nd order -> ~4)")
    write_metadata(args.out / "convergence.json",
                   {"errors": report.errors, "dt_ratio": report.dt_ratio,
                    "t_probe": report.t_probe, "preset": args.preset})
    return 0


if __name__ == "__main__":
    sys.exit(main())
