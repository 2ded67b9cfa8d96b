#!/usr/bin/env python3
"""Run the four reference operating points and render a comparison panel.

Desk preset takes ~10 minutes on one core; the paper preset runs for hours.

    python scripts/regime_points.py --preset desk --out out/regimes
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from polturb import (
    DisorderSpec,
    FieldPair,
    ModelParams,
    PumpSpec,
    Roi,
    make_grid,
)
from polturb.classify import ClassifierThresholds
from polturb.pipeline import simulate_point
from polturb.sweep import apply_preset

POINTS = ((1e-3, "linear"), (0.6, "solitonic"), (1.2, "turbulent"), (3.7, "superfluid"))


class KeepLast:
    def __init__(self):
        self.fields = None

    def __call__(self, fields: FieldPair):
        self.fields = fields


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--preset", choices=("desk", "paper"), default="desk")
    ap.add_argument("--delta", type=float, default=0.22)
    ap.add_argument("--k-p", type=float, default=0.4)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("out/regimes"))
    args = ap.parse_args()

    n, length, solver = apply_preset(args.preset)
    grid = make_grid(n, length)
    roi = Roi()
    args.out.mkdir(parents=True, exist_ok=True)

    fig, axes = plt.subplots(3, 4, figsize=(14, 9.5), constrained_layout=True)
    for col, (f_inc, expect) in enumerate(POINTS):
        params = ModelParams(delta_lp=args.delta, k_p=args.k_p)
        pump = PumpSpec(f_inc=f_inc, k_p=args.k_p)
        keep = KeepLast()
        analysis = simulate_point(
            params, pump, DisorderSpec(seed=args.seed), solver, grid,
            roi=roi, thresholds=ClassifierThresholds(k_linear_tol=0.05),
            extra_sinks=(keep,),
        )
        fields = keep.fields
        half = length / 2
        ext = (-half, half, -half, half)
        axes[0, col].imshow(np.angle(fields.psi_c), origin="lower", extent=ext,
                            cmap="twilight_shifted")
        axes[0, col].set_title(
            f"F={f_inc:g}: {analysis.label.label}\n"
            f"g1={analysis.coherence.g1_scalar:.3f} eta={analysis.eta:.2f}"
        )
        axes[1, col].imshow(np.abs(fields.psi_c) ** 2, origin="lower", extent=ext,
                            cmap="viridis")
        sy, sx = roi.resolve(grid)
        x = grid.x
        for ax in axes[:2, col]:
            ax.add_patch(plt.Rectangle((x[sx.start], x[sy.start]),
                                       x[sx.stop - 1] - x[sx.start],
                                       x[sy.stop - 1] - x[sy.start],
                                       fill=False, color="yellow", lw=1.0))
        from polturb import momentum_spectrum

        spec = momentum_spectrum(fields, roi)
        sel = (np.abs(spec.kx) <= 3.0)
        axes[2, col].imshow(spec.map[np.ix_(sel, sel)], origin="lower",
                            extent=(-3, 3, -3, 3), cmap="inferno")
        axes[2, col].set_xlabel("k_x")
        print(f"F={f_inc:g}: {analysis.label.label} (expected {expect}), "
              f"g1={analysis.coherence.g1_scalar:.4f}, eta={analysis.eta:.3f}, "
              f"k_field={analysis.density.k_field:.3f}, "
              f"vortices={analysis.mean_vortices:.1f}")
    axes[0, 0].set_ylabel("phase")
    axes[1, 0].set_ylabel("density")
    axes[2, 0].set_ylabel("density spectrum")
    out = args.out / f"regimes_{args.preset}.png"
    fig.savefig(out, dpi=140)
    print(f"panel -> {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
