#!/usr/bin/env python3
"""Map the coherence phase diagram over (pump amplitude, detuning).

The full-size reproduction (paper preset, 70 cells, k_p sweeps) runs for many
hours per diagram on one core; the sweep is resumable, so interrupted work
continues from the manifest.

    # reduced diagram, ~40 min on one core
    python scripts/phase_diagram.py --preset desk --out out/diagram

    # full-scale diagram at k_p = 0.4 (long!)
    python scripts/phase_diagram.py --preset paper --cells 10x7 --out out/fig_kp04

    # higher-momentum variant: the turbulent region broadens and deepens
    python scripts/phase_diagram.py --preset paper --k-p 0.6 --out out/fig_kp06
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from polturb import DisorderSpec, ModelParams, PumpSpec
from polturb.classify import ClassifierThresholds
from polturb.sweep import (
    SweepPlan,
    apply_preset,
    grid_cells,
    run_sweep,
    save_diagram_heatmap,
)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--preset", choices=("desk", "paper"), default="desk")
    ap.add_argument("--cells", default="5x4", help="FxD grid, e.g. 10x7")
    ap.add_argument("--f-range", default="0.3:3.7")
    ap.add_argument("--delta-range", default="0.05:0.35")
    ap.add_argument("--k-p", type=float, default=0.4)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("out/diagram"))
    args = ap.parse_args()

    nf, nd = (int(v) for v in args.cells.split("x"))
    f_lo, f_hi = (float(v) for v in args.f_range.split(":"))
    d_lo, d_hi = (float(v) for v in args.delta_range.split(":"))
    n, length, solver = apply_preset(args.preset)

    plan = SweepPlan(
        cells=grid_cells(np.linspace(f_lo, f_hi, nf), np.linspace(d_lo, d_hi, nd),
                         args.k_p, args.seed),
        params=ModelParams(k_p=args.k_p),
        pump=PumpSpec(k_p=args.k_p),
        disorder=DisorderSpec(seed=args.seed),
        solver=solver,
        grid_n=n,
        grid_length=length,
        out_dir=str(args.out),
        workers=args.workers,
        thresholds=ClassifierThresholds(k_linear_tol=0.05),
        save_maps=True,
    )
    cells = run_sweep(plan)
    done = [c for c in cells if c.done and not c.blow_up]
    print(f"{len(done)}/{len(cells)} cells complete")
    for c in cells:
        print(f"  F={c.spec.f_inc:6.3f} delta={c.spec.delta:5.3f} -> "
              f"{c.label or 'BLEW UP'} g1={c.g1 if c.g1 is None else round(c.g1, 4)}")
    if len(done) >= 4:
        png = save_diagram_heatmap(Path(args.out) / "phase_diagram.png", cells)
        print(f"diagram -> {png}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
