"""Phase-diagram sweeps, the convergence harness, presets and persistence.

A sweep is a list of independent cells over (pump amplitude, detuning, pump
wavevector, seed).  Completed cells are recorded in an atomically updated
manifest so interrupted sweeps resume without recomputation, and per-cell
outputs are deterministic for fixed seeds.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .classify import ClassifierThresholds
from .drive import DisorderSpec, PumpSpec
from .fieldio import (
    _jsonable,
    save_heatmap,
    write_metadata,
    write_observables_csv,
    write_real_dump,
)
from .grid import FieldPair, Grid2D, Roi, empty_fields, make_grid
from .observables import convergence_error
from .params import ModelParams, pump_intensity_mw_per_um2
from .pipeline import RunAnalysis, simulate_point
from .solver import BlowUpError, SolverConfig, build_drive, run

PRESETS = {
    # reduced-cost preset used by the acceptance suite: same pixel size and
    # physics as the full-scale setup, quarter the area, single precision
    "desk": {"n": 256, "length": 128.0, "t_end": 800.0, "precision": "single"},
    "paper": {"n": 512, "length": 256.0, "t_end": 2000.0, "precision": "double"},
}


def apply_preset(name: str, grid_n: int | None = None, grid_length: float | None = None,
                 solver: SolverConfig | None = None) -> tuple[int, float, SolverConfig]:
    """Grid size and solver settings for a named preset, with overrides."""
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; expected one of {tuple(PRESETS)}")
    p = PRESETS[name]
    solver = solver or SolverConfig()
    solver = replace(solver, t_end=p["t_end"], precision=p["precision"])
    return grid_n or p["n"], grid_length or p["length"], solver


@dataclass(frozen=True)
class CellSpec:
    f_inc: float
    delta: float
    k_p: float
    seed: int

    def cell_id(self) -> str:
        return (
            f"F{self.f_inc:g}_D{self.delta:g}_K{self.k_p:g}_S{self.seed}"
        ).replace(".", "p").replace("-", "m")


@dataclass
class PhaseCell:
    """One sweep point: inputs plus, once the run completed, its outputs."""

    spec: CellSpec
    g1: float | None = None
    g1_long: float | None = None
    eta: float | None = None
    eta_std: float | None = None
    label: str | None = None
    k_field: float | None = None
    mean_vortices: float | None = None
    blow_up: bool = False
    runtime_s: float | None = None

    @property
    def done(self) -> bool:
        return self.blow_up or self.g1 is not None


@dataclass
class SweepPlan:
    cells: list[CellSpec]
    params: ModelParams = field(default_factory=ModelParams)
    pump: PumpSpec = field(default_factory=PumpSpec)
    disorder: DisorderSpec = field(default_factory=DisorderSpec)
    solver: SolverConfig = field(default_factory=SolverConfig)
    grid_n: int = 512
    grid_length: float = 256.0
    out_dir: str = "polturb_out"
    workers: int = 1
    roi_side: float = 24.0
    g1_window: float = 100.0
    eta_window: float = 500.0
    thresholds: ClassifierThresholds = field(default_factory=ClassifierThresholds)
    save_maps: bool = False

    def validate(self) -> None:
        if len(set(self.cells)) != len(self.cells):
            raise ValueError("sweep cells are not unique")
        self.solver.validate()

    def shared_hash(self) -> str:
        blob = json.dumps(
            _jsonable(
                {
                    "params": self.params,
                    "pump": self.pump,
                    "disorder": self.disorder,
                    "solver": self.solver,
                    "grid_n": self.grid_n,
                    "grid_length": self.grid_length,
                    "roi_side": self.roi_side,
                    "g1_window": self.g1_window,
                    "eta_window": self.eta_window,
                    "thresholds": self.thresholds,
                }
            ),
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def cell_hash(self, spec: CellSpec) -> str:
        blob = json.dumps(_jsonable(dataclasses.asdict(spec)), sort_keys=True)
        return hashlib.sha256((self.shared_hash() + blob).encode()).hexdigest()[:16]


def grid_cells(f_values, delta_values, k_p: float, seed: int) -> list[CellSpec]:
    """Cartesian product of pump amplitudes and detunings, one shared seed."""
    return [
        CellSpec(float(f), float(d), float(k_p), int(seed))
        for f in f_values
        for d in delta_values
    ]


def _run_cell(plan: SweepPlan, spec: CellSpec) -> PhaseCell:
    params = replace(
        plan.params, delta_lp=spec.delta, k_p=spec.k_p, delta_c=None, delta_x=None
    )
    pump = replace(plan.pump, f_inc=spec.f_inc, k_p=spec.k_p)
    disorder = replace(plan.disorder, seed=spec.seed)
    grid = make_grid(plan.grid_n, plan.grid_length)
    roi = Roi(size=(plan.roi_side, plan.roi_side))
    cell = PhaseCell(spec=spec)
    start = time.perf_counter()
    try:
        analysis = simulate_point(
            params,
            pump,
            disorder,
            plan.solver,
            grid,
            roi=roi,
            g1_window=plan.g1_window,
            eta_window=plan.eta_window,
            thresholds=plan.thresholds,
        )
    except BlowUpError as err:
        cell.blow_up = True
        cell.runtime_s = time.perf_counter() - start
        _write_cell_outputs(plan, spec, None, blow_up_t=err.t)
        return cell
    cell.runtime_s = time.perf_counter() - start
    cell.g1 = analysis.coherence.g1_scalar
    if analysis.coherence_long is not None:
        cell.g1_long = analysis.coherence_long.g1_scalar
    cell.eta = analysis.eta
    cell.eta_std = analysis.eta_std
    cell.label = analysis.label.label
    cell.k_field = analysis.density.k_field
    cell.mean_vortices = analysis.mean_vortices
    _write_cell_outputs(plan, spec, analysis)
    return cell


def _cell_dir(plan: SweepPlan, spec: CellSpec) -> Path:
    return Path(plan.out_dir) / "cells" / spec.cell_id()


def _write_cell_outputs(plan: SweepPlan, spec: CellSpec, analysis: RunAnalysis | None,
                        blow_up_t: float | None = None) -> None:
    cdir = _cell_dir(plan, spec)
    cdir.mkdir(parents=True, exist_ok=True)
    meta = {
        "cell": spec,
        "hash": plan.cell_hash(spec),
        "params": plan.params,
        "pump": dataclasses.replace(plan.pump, f_inc=spec.f_inc, k_p=spec.k_p),
        "disorder": dataclasses.replace(plan.disorder, seed=spec.seed),
        "solver": plan.solver,
        "grid": {"n": plan.grid_n, "length": plan.grid_length},
        "seed": spec.seed,
        "intensity": pump_intensity_mw_per_um2(plan.params, spec.f_inc),
    }
    if blow_up_t is not None:
        meta["blow_up_t"] = blow_up_t
        write_metadata(cdir / "analysis.json", meta)
        return
    write_observables_csv(cdir / "observables.csv", analysis.records)
    meta["result"] = analysis.row()
    meta["label_evidence"] = analysis.label.evidence
    meta["summary"] = analysis.summary
    write_metadata(cdir / "analysis.json", meta)
    if plan.save_maps:
        h = analysis.coherence.g1_map.shape[0]
        roi_grid = Grid2D(n=h, length=h * plan.grid_length / plan.grid_n)
        g1m = np.nan_to_num(analysis.coherence.g1_map, nan=0.0)
        write_real_dump(cdir / "g1_map.bin", g1m, roi_grid)
        write_real_dump(cdir / "density.bin", analysis.tavg_density, roi_grid)
        if analysis.coherence_long is not None:
            write_real_dump(
                cdir / "g1_map_long.bin",
                np.nan_to_num(analysis.coherence_long.g1_map, nan=0.0),
                roi_grid,
            )
        from .observables import density_spectrum

        spec = density_spectrum(analysis.tavg_density, plan.grid_length / plan.grid_n)
        write_real_dump(cdir / "spectrum.bin", spec.map,
                        Grid2D(n=spec.map.shape[0], length=2 * abs(spec.kx[0])))


class SweepManifest:
    """Atomic JSON record of per-cell completion; the resume point."""

    def __init__(self, path: Path, plan_hash: str):
        self.path = Path(path)
        self.plan_hash = plan_hash
        self.cells: dict = {}
        if self.path.exists():
            data = json.loads(self.path.read_text())
            if data.get("plan_hash") == plan_hash:
                self.cells = data.get("cells", {})

    def done(self, cell_id: str, cell_hash: str) -> bool:
        entry = self.cells.get(cell_id)
        return bool(entry) and entry.get("hash") == cell_hash and entry.get("status") in (
            "done",
            "blow_up",
        )

    def record(self, cell_id: str, cell_hash: str, cell: PhaseCell) -> None:
        self.cells[cell_id] = {
            "hash": cell_hash,
            "status": "blow_up" if cell.blow_up else "done",
            "outputs": _jsonable(dataclasses.asdict(cell)),
        }
        self._flush()

    def _flush(self) -> None:
        tmp = self.path.with_suffix(".tmp")
        tmp.write_text(
            json.dumps({"plan_hash": self.plan_hash, "cells": self.cells}, indent=2, sort_keys=True)
        )
        os.replace(tmp, self.path)


PHASE_CSV_COLUMNS = (
    "f_inc", "delta", "k_p", "seed", "g1", "g1_long", "eta", "eta_std", "label",
    "k_field", "mean_vortices", "blow_up", "runtime_s",
)


def run_sweep(plan: SweepPlan) -> list[PhaseCell]:
    """Execute (or resume) every cell of the plan and write the phase CSV."""
    plan.validate()
    out = Path(plan.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = SweepManifest(out / "manifest.json", plan.shared_hash())

    pending = []
    results: dict[str, PhaseCell] = {}
    for spec in plan.cells:
        cid = spec.cell_id()
        if manifest.done(cid, plan.cell_hash(spec)):
            results[cid] = _cell_from_manifest(manifest.cells[cid], spec)
        else:
            pending.append(spec)

    if pending:
        if plan.workers > 1:
            with ProcessPoolExecutor(max_workers=plan.workers) as pool:
                for cell in pool.map(_run_cell, [plan] * len(pending), pending):
                    cid = cell.spec.cell_id()
                    manifest.record(cid, plan.cell_hash(cell.spec), cell)
                    results[cid] = cell
        else:
            for spec in pending:
                cell = _run_cell(plan, spec)
                cid = spec.cell_id()
                manifest.record(cid, plan.cell_hash(spec), cell)
                results[cid] = cell

    cells = [results[spec.cell_id()] for spec in plan.cells]
    _write_phase_csv(out / "phase_diagram.csv", cells)
    return cells


def _cell_from_manifest(entry: dict, spec: CellSpec) -> PhaseCell:
    data = dict(entry["outputs"])
    data.pop("spec", None)
    return PhaseCell(spec=spec, **data)


def _write_phase_csv(path: Path, cells: list[PhaseCell]) -> Path:
    def fmt(v):
        if v is None:
            return ""
        if isinstance(v, bool):
            return str(int(v))
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        if isinstance(v, float):
            return repr(v)
        return str(v)

    with open(path, "w") as fh:
        fh.write(",".join(PHASE_CSV_COLUMNS) + "\n")
        for c in cells:
            row = (
                c.spec.f_inc, c.spec.delta, c.spec.k_p, c.spec.seed,
                c.g1, c.g1_long, c.eta, c.eta_std, c.label, c.k_field,
                c.mean_vortices, c.blow_up, c.runtime_s,
            )
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def write_cross_table_csv(path, table) -> Path:
    """Appendix-style cross-probability table as CSV (rows: reference regime)."""
    path = Path(path)
    with open(path, "w") as fh:
        fh.write("reference,eta_mean,eta_std," + ",".join(table.regimes) + ",defined\n")
        for i, ref in enumerate(table.regimes):
            cells = ",".join(f"{v:.6f}" if np.isfinite(v) else "" for v in table.matrix[i])
            defined = int(ref not in table.undefined)
            fh.write(
                f"{ref},{table.eta_mean[ref]:.6g},{table.eta_std[ref]:.6g},{cells},{defined}\n"
            )
    return path


def sweep_cross_probability(cells: list[PhaseCell]):
    """Cross-probability table over completed sweep cells, if enough runs exist."""
    from .classify import cross_probability

    labeled = [(c.label, c.eta) for c in cells if c.label is not None and c.eta is not None]
    return cross_probability(labeled)


def interpolate_diagram(
    cells: list[PhaseCell], resolution: tuple[int, int] = (64, 64), value: str = "g1"
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dense (F, delta) map of a cell output by bilinear interpolation.

    Returns (f_axis, delta_axis, map); the raw cells stay authoritative.
    Needs at least four non-collinear cells spanning a rectangle.
    """
    pts = [(c.spec.f_inc, c.spec.delta, getattr(c, value)) for c in cells if getattr(c, value) is not None]
    if len(pts) < 4:
        raise ValueError(f"need >= 4 completed cells, got {len(pts)}")
    f = np.array([p[0] for p in pts])
    d = np.array([p[1] for p in pts])
    v = np.array([p[2] for p in pts])
    if np.unique(f).size < 2 or np.unique(d).size < 2:
        raise ValueError("degenerate cell layout: cells are collinear in (F, delta)")
    f_axis = np.linspace(f.min(), f.max(), resolution[0])
    d_axis = np.linspace(d.min(), d.max(), resolution[1])
    fu = np.unique(f)
    du = np.unique(d)
    if fu.size * du.size == len(pts):
        # complete rectangular layout: exact bilinear interpolation
        from scipy.interpolate import RegularGridInterpolator

        vals = np.full((fu.size, du.size), np.nan)
        for fi, di, vi in pts:
            vals[np.searchsorted(fu, fi), np.searchsorted(du, di)] = vi
        itp = RegularGridInterpolator((fu, du), vals)
        FF, DD = np.meshgrid(f_axis, d_axis, indexing="ij")
        grid_map = itp(np.stack([FF.ravel(), DD.ravel()], axis=1)).reshape(FF.shape)
    else:
        from scipy.interpolate import griddata

        FF, DD = np.meshgrid(f_axis, d_axis, indexing="ij")
        grid_map = griddata((f, d), v, (FF, DD), method="linear")
    return f_axis, d_axis, grid_map


def save_diagram_heatmap(path, cells: list[PhaseCell], value: str = "g1") -> Path:
    f_axis, d_axis, grid_map = interpolate_diagram(cells, value=value)
    return save_heatmap(
        path,
        grid_map.T,
        extent=(f_axis[0], f_axis[-1], d_axis[0], d_axis[-1]),
        cmap="inferno",
        label=value,
    )


# -- convergence harness ----------------------------------------------------

REFINEMENTS = ("dt2", "dx2", "L2")


@dataclass
class ConvergenceReport:
    errors: dict                      # refinement -> relative squared error
    dt_ratio: float | None = None     # amplitude-error ratio between dt halvings
    t_probe: float = 0.0
    failed: tuple = ()                # refinements whose runs blew up

    def largest(self) -> str:
        return max(self.errors, key=lambda k: self.errors[k])


class _FinalFieldSink:
    def __init__(self):
        self.last: FieldPair | None = None

    def __call__(self, fields: FieldPair) -> None:
        self.last = fields


def _run_final_state(params, pump, disorder, solver, n, length,
                     cache_dir=None) -> FieldPair:
    cache = None
    if cache_dir is not None:
        blob = json.dumps(
            _jsonable({"params": params, "pump": pump, "disorder": disorder,
                       "solver": solver, "n": n, "length": length}),
            sort_keys=True,
        )
        key = hashlib.sha256(blob.encode()).hexdigest()[:20]
        cache = Path(cache_dir) / f"state_{key}.bin"
        if cache.exists():
            from .fieldio import read_field_dump

            return read_field_dump(cache)
    grid = make_grid(n, length)
    drive = build_drive(params, pump, disorder, grid, solver)
    sink = _FinalFieldSink()
    run(empty_fields(grid), params, drive, solver, sinks=(sink,))
    if cache is not None:
        from .fieldio import write_field_dump, write_metadata

        cache.parent.mkdir(parents=True, exist_ok=True)
        write_field_dump(cache, sink.last)
        write_metadata(cache, {"params": params, "pump": pump, "disorder": disorder,
                               "solver": solver, "n": n, "length": length})
    return sink.last


def convergence_harness(
    params: ModelParams,
    pump: PumpSpec,
    disorder: DisorderSpec,
    solver: SolverConfig,
    grid_n: int,
    grid_length: float,
    refinements: tuple = REFINEMENTS,
    dt_ladder: bool = True,
    window_side: float = 10.0,
    cache_dir=None,
) -> ConvergenceReport:
    """Refinement study against the base discretization.

    Each refinement run (dt/2, dx/2 at fixed L, L*2 at fixed dx) plays the
    reference in the central-window error; optionally a second halving dt/4
    gives the amplitude-convergence ratio between successive dt refinements
    (second order in dt shows a ratio near 4).  With ``cache_dir`` set, each
    leg's final state is persisted and an interrupted study resumes.
    """
    for r in refinements:
        if r not in REFINEMENTS:
            raise ValueError(f"unknown refinement {r!r}; expected subset of {REFINEMENTS}")
    leg = lambda cfg, n, length: _run_final_state(
        params, pump, disorder, cfg, n, length, cache_dir=cache_dir
    )
    base = leg(solver, grid_n, grid_length)  # a blown-up base aborts the study
    errors: dict[str, float] = {}
    failed: list[str] = []
    dt_ratio = None
    half = None
    if "dt2" in refinements or dt_ladder:
        try:
            half = leg(replace(solver, dt=solver.dt / 2), grid_n, grid_length)
            errors["dt2"] = convergence_error(base, half, window_side)
        except BlowUpError:
            failed.append("dt2")
    if dt_ladder and half is not None:
        try:
            quarter = leg(replace(solver, dt=solver.dt / 4), grid_n, grid_length)
            err_hq = convergence_error(half, quarter, window_side)
            if err_hq > 0:
                dt_ratio = float(np.sqrt(errors["dt2"] / err_hq))
        except BlowUpError:
            failed.append("dt4")
    if "dx2" in refinements:
        try:
            fine = leg(solver, 2 * grid_n, grid_length)
            errors["dx2"] = convergence_error(base, fine, window_side)
        except BlowUpError:
            failed.append("dx2")
    if "L2" in refinements:
        try:
            big = leg(solver, 2 * grid_n, 2 * grid_length)
            errors["L2"] = convergence_error(base, big, window_side)
        except BlowUpError:
            failed.append("L2")
    return ConvergenceReport(errors=errors, dt_ratio=dt_ratio, t_probe=solver.t_end,
                             failed=tuple(failed))
