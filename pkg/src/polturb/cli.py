"""Command line interface.

Subcommands: run (single simulation), sweep (phase diagram), analyze
(observables from stored snapshots), converge (refinement study), classify
(re-label stored analyses).  Output root resolves from --out, then the
POLTURB_OUTPUT_ROOT environment variable, then ./polturb_out.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .classify import ClassifierThresholds, decide_label
from .config import ConfigBundle, load_config
from .drive import measured_lobe_distance
from .fieldio import (
    read_field_dump,
    save_heatmap,
    write_field_dump,
    write_metadata,
    write_observables_csv,
    write_real_dump,
)
from .grid import Grid2D, Roi, make_grid
from .observables import RoiSeries, snapshot_record
from .params import pump_intensity_mw_per_um2
from .pipeline import analyze_run, simulate_point
from .solver import BlowUpError, RunSummary, SolverConfig
from .sweep import (
    SweepPlan,
    apply_preset,
    convergence_harness,
    grid_cells,
    run_sweep,
    save_diagram_heatmap,
)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, BlowUpError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polturb")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, help="INI configuration file")
        p.add_argument("--preset", choices=("desk", "paper"), help="grid/time preset")
        p.add_argument("--seed", type=int, help="disorder seed override")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--workers", type=int, help="parallel cell workers")

    p_run = sub.add_parser("run", help="single simulation from a configuration")
    common(p_run)
    p_run.add_argument("--dump-fields", type=float, metavar="EVERY",
                       help="write binary snapshots every EVERY time units")
    p_run.add_argument("--disorder-file", type=Path,
                       help="reuse a stored disorder realization instead of sampling")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="phase-diagram sweep over (F, delta)")
    common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_an = sub.add_parser("analyze", help="observables from stored snapshots")
    p_an.add_argument("snapshots", type=Path, help="directory of field dumps")
    p_an.add_argument("--out", type=Path)
    p_an.add_argument("--roi-side", type=float, default=24.0)
    p_an.set_defaults(func=cmd_analyze)

    p_conv = sub.add_parser("converge", help="discretization refinement study")
    common(p_conv)
    p_conv.add_argument("--refinements", nargs="+", default=["dt2", "dx2", "L2"],
                        choices=("dt2", "dx2", "L2"))
    p_conv.add_argument("--no-dt-ladder", action="store_true")
    p_conv.set_defaults(func=cmd_converge)

    p_cls = sub.add_parser("classify", help="relabel a stored run analysis")
    p_cls.add_argument("analysis", type=Path, help="analysis.json of a run or cell")
    p_cls.add_argument("--g1-turbulent", type=float)
    p_cls.set_defaults(func=cmd_classify)
    return parser


def _load_bundle(args) -> ConfigBundle:
    bundle = load_config(args.config) if args.config else ConfigBundle()
    if args.preset:
        bundle.grid_n, bundle.grid_length, bundle.solver = apply_preset(
            args.preset, None, None, bundle.solver
        )
    if getattr(args, "seed", None) is not None:
        bundle.disorder.seed = args.seed
        bundle.sweep.seed = args.seed
    if getattr(args, "workers", None) is not None:
        bundle.sweep.workers = args.workers
    return bundle


def _out_dir(args, bundle: ConfigBundle | None = None) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    if bundle is not None and bundle.sweep.out_dir:
        return Path(bundle.sweep.out_dir)
    return Path(os.environ.get("POLTURB_OUTPUT_ROOT", "polturb_out"))


def cmd_run(args) -> int:
    from .fieldio import read_real_dump
    from .solver import build_drive

    bundle = _load_bundle(args)
    out = _out_dir(args, bundle)
    out.mkdir(parents=True, exist_ok=True)
    grid = make_grid(bundle.grid_n, bundle.grid_length)
    drive = build_drive(bundle.model, bundle.pump, bundle.disorder, grid,
                        bundle.solver)
    if args.disorder_file:
        w, w_grid, _ = read_real_dump(args.disorder_file)
        if w_grid.n != grid.n or w_grid.length != grid.length:
            raise ValueError(
                f"disorder realization grid {w_grid} does not match run grid {grid}"
            )
        drive.disorder = w
    # the realization actually used, exportable for exact cross-run reuse
    write_real_dump(out / "disorder.bin", drive.disorder, grid)
    sinks = ()
    if args.dump_fields:
        dump_dir = out / "snapshots"
        dump_dir.mkdir(exist_ok=True)
        every = args.dump_fields

        class Dumper:
            def __init__(self):
                self.next_t = 0.0

            def __call__(self, fields):
                if fields.t + 1e-9 >= self.next_t:
                    path = dump_dir / f"fields_t{fields.t:012.4f}.bin"
                    write_field_dump(path, fields)
                    write_metadata(path, _run_metadata(bundle))
                    self.next_t += every

        sinks = (Dumper(),)
    blow_up_t = None
    try:
        analysis = simulate_point(
            bundle.model, bundle.pump, bundle.disorder, bundle.solver, grid,
            roi=Roi(), thresholds=bundle.thresholds, extra_sinks=sinks,
            drive=drive,
        )
    except BlowUpError as err:
        blow_up_t = err.t
        summary = {"blew_up": True, "blow_up_t": blow_up_t}
        write_metadata(out / "summary.json", {"summary": summary, **_run_metadata(bundle)})
        print(f"run blew up at t={blow_up_t}")
        return 2
    write_observables_csv(out / "observables.csv", analysis.records)
    final = analysis.records[-1]
    meta = _run_metadata(bundle)
    meta["summary"] = {
        "steps": analysis.summary.steps,
        "wall_time_s": analysis.summary.wall_time_s,
        "blew_up": False,
        "final": {
            "t": final.t, "n_c": final.n_c, "e_kin": final.e_kin,
            "e_int": final.e_int, "eta": final.eta, "k_peak": final.k_peak,
            "n_vortices": final.n_vortices,
        },
        "result": analysis.row(),
        "label_evidence": analysis.label.evidence,
    }
    write_metadata(out / "summary.json", meta)
    h = analysis.coherence.g1_map.shape[0]
    roi_grid = Grid2D(n=h, length=h * grid.dx)
    write_real_dump(out / "g1_map.bin", np.nan_to_num(analysis.coherence.g1_map), roi_grid)
    write_real_dump(out / "density_tavg.bin", analysis.tavg_density, roi_grid)
    from .observables import density_spectrum

    spec = density_spectrum(analysis.tavg_density, grid.dx)
    write_real_dump(out / "spectrum.bin", spec.map,
                    Grid2D(n=spec.map.shape[0], length=2 * abs(spec.kx[0])))
    ext = (-roi_grid.length / 2, roi_grid.length / 2) * 2
    save_heatmap(out / "g1_map.png", np.nan_to_num(analysis.coherence.g1_map),
                 extent=ext, cmap="inferno", label="g1", vmin=0, vmax=1)
    save_heatmap(out / "density_tavg.png", analysis.tavg_density,
                 extent=ext, cmap="viridis", label="photon density")
    print(f"label={analysis.label.label} g1={analysis.coherence.g1_scalar:.4f} "
          f"eta={analysis.eta:.3f} -> {out}")
    return 0


def _run_metadata(bundle: ConfigBundle) -> dict:
    return {
        "model": bundle.model,
        "pump": bundle.pump,
        "disorder": bundle.disorder,
        "solver": bundle.solver,
        "grid": {"n": bundle.grid_n, "length": bundle.grid_length},
        "seed": bundle.disorder.seed,
        "pump_intensity": pump_intensity_mw_per_um2(bundle.model, bundle.pump.f_inc),
        "pump_lobe_distance": measured_lobe_distance(bundle.pump),
    }


def cmd_sweep(args) -> int:
    bundle = _load_bundle(args)
    out = _out_dir(args, bundle)
    cells = grid_cells(bundle.sweep.f_inc, bundle.sweep.delta, bundle.sweep.k_p,
                       bundle.sweep.seed)
    plan = SweepPlan(
        cells=cells,
        params=bundle.model,
        pump=bundle.pump,
        disorder=bundle.disorder,
        solver=bundle.solver,
        grid_n=bundle.grid_n,
        grid_length=bundle.grid_length,
        out_dir=str(out),
        workers=bundle.sweep.workers,
        thresholds=bundle.thresholds,
        save_maps=bundle.sweep.save_maps,
    )
    results = run_sweep(plan)
    done = sum(1 for c in results if c.done and not c.blow_up)
    blew = sum(1 for c in results if c.blow_up)
    if done >= 4:
        try:
            save_diagram_heatmap(out / "phase_diagram.png", results)
        except ValueError:
            pass
    try:
        from .sweep import sweep_cross_probability, write_cross_table_csv

        write_cross_table_csv(out / "cross_probability.csv",
                              sweep_cross_probability(results))
    except ValueError:
        pass  # needs at least two completed runs per represented regime
    print(f"sweep complete: {done} cells ok, {blew} blew up -> {out}")
    return 0


def cmd_analyze(args) -> int:
    paths = sorted(Path(args.snapshots).glob("*.bin"))
    if not paths:
        raise FileNotFoundError(f"no .bin snapshots under {args.snapshots}")
    out = args.out or Path(args.snapshots)
    roi = Roi(size=(args.roi_side, args.roi_side))
    records = []
    ts, stack = [], []
    for p in paths:
        fields = read_field_dump(p)
        records.append(snapshot_record(fields, roi))
        sy, sx = roi.resolve(fields.grid)
        ts.append(fields.t)
        stack.append(fields.psi_c[sy, sx].astype(np.complex64))
    order = np.argsort(ts)
    write_observables_csv(out / "observables.csv", [records[i] for i in order])
    print(f"analyzed {len(records)} snapshots -> {out / 'observables.csv'}")
    if len(records) >= 10:
        from .observables import g1 as g1_fn

        series = RoiSeries(np.array(ts)[order], np.array(stack)[order])
        coh = g1_fn(series)
        grid = read_field_dump(paths[0]).grid
        h = coh.g1_map.shape[0]
        write_real_dump(out / "g1_map.bin", np.nan_to_num(coh.g1_map),
                        Grid2D(n=h, length=h * grid.dx))
        print(f"g1 over [{coh.window[0]}, {coh.window[1]}] (N={coh.window[2]}): "
              f"{coh.g1_scalar:.4f}")
    return 0


def cmd_converge(args) -> int:
    bundle = _load_bundle(args)
    out = _out_dir(args, bundle)
    out.mkdir(parents=True, exist_ok=True)
    report = convergence_harness(
        bundle.model, bundle.pump, bundle.disorder, bundle.solver,
        bundle.grid_n, bundle.grid_length,
        refinements=tuple(args.refinements),
        dt_ladder=not args.no_dt_ladder,
    )
    lines = [f"relative error at t={report.t_probe:g} (central window):"]
    for name, err in report.errors.items():
        bar = "#" * max(1, int(40 + 8 * np.log10(max(err, 1e-16))))
        lines.append(f"  {name:>4}: {err:.3e} {bar}")
    if report.dt_ratio is not None:
        lines.append(f"  dt halving amplitude ratio: {report.dt_ratio:.2f} (2nd order -> ~4)")
    text = "\n".join(lines)
    print(text)
    (out / "convergence.txt").write_text(text + "\n")
    write_metadata(out / "convergence.json",
                   {"errors": report.errors, "dt_ratio": report.dt_ratio,
                    "t_probe": report.t_probe})
    return 0


def cmd_classify(args) -> int:
    data = json.loads(Path(args.analysis).read_text())
    ev = data.get("label_evidence") or data.get("summary", {}).get("label_evidence")
    if not ev:
        raise ValueError(f"{args.analysis} carries no label evidence")
    th = ClassifierThresholds(**ev["thresholds"])
    if args.g1_turbulent is not None:
        th.g1_turbulent = args.g1_turbulent
    label = decide_label(ev, th)
    report = {"label": label, "evidence": ev,
              "thresholds": dataclasses.asdict(th)}
    out = Path(args.analysis).with_name("classification.json")
    out.write_text(json.dumps(report, indent=2, sort_keys=True))
    print(f"{label} -> {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
