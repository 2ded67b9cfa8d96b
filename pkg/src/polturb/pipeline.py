"""Streaming per-run analysis: sinks fed by the integrator and the final report.

A production run never keeps full-grid history; the sinks reduce every
snapshot to scalar records plus a window-restricted photon-field stack from
which coherence, time-averaged density metrics and the regime label derive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classify import ClassifierThresholds, DensityStats, RegimeLabel, classify_run
from .drive import DisorderSpec, PumpSpec
from .grid import FieldPair, Grid2D, Roi, empty_fields
from .observables import (
    CoherenceResult,
    ObservableRecord,
    RoiSeries,
    density_spectrum,
    g1,
    snapshot_record,
)
from .params import ModelParams
from .solver import BlowUpError, DriveFields, RunSummary, SolverConfig, build_drive, run


class ObservableSink:
    """Reduces each snapshot to one ObservableRecord."""

    def __init__(self, roi: Roi, count_vortices: bool = True):
        self.roi = roi
        self.count_vortices = count_vortices
        self.records: list[ObservableRecord] = []

    def __call__(self, fields: FieldPair) -> None:
        self.records.append(snapshot_record(fields, self.roi, self.count_vortices))


class RoiStackSink:
    """Collects the window-restricted photon field at every snapshot."""

    def __init__(self, roi: Roi):
        self.roi = roi
        self._t: list[float] = []
        self._data: list[np.ndarray] = []

    def __call__(self, fields: FieldPair) -> None:
        sy, sx = self.roi.resolve(fields.grid)
        self._t.append(fields.t)
        self._data.append(np.asarray(fields.psi_c[sy, sx], dtype=np.complex64))

    def series(self) -> RoiSeries:
        return RoiSeries(np.array(self._t), np.array(self._data))


@dataclass
class RunAnalysis:
    """Everything a phase-diagram cell or a report needs from one run."""

    summary: RunSummary
    records: list[ObservableRecord]
    coherence: CoherenceResult          # classification window
    coherence_long: CoherenceResult | None
    eta: float
    eta_std: float
    density: DensityStats
    label: RegimeLabel
    mean_vortices: float
    tavg_density: np.ndarray
    roi_series: RoiSeries
    blow_up_t: float | None = None

    def row(self) -> dict:
        return {
            "g1": self.coherence.g1_scalar,
            "eta": self.eta,
            "eta_std": self.eta_std,
            "label": self.label.label,
            "k_field": self.density.k_field,
            "k_peak": self.density.k_peak,
            "mean_vortices": self.mean_vortices,
            "blow_up": self.blow_up_t is not None,
        }


def density_stats(series: RoiSeries, dx: float, t_start: float, t_end: float) -> tuple[DensityStats, np.ndarray]:
    """Time-averaged window density metrics over [t_start, t_end]."""
    sel = series.select(t_start, t_end)
    dens = (np.abs(sel.data.astype(np.complex128)) ** 2).mean(axis=0)
    spec = density_spectrum(dens, dx)
    dmax = float(dens.max())
    dmin = float(dens.min())
    mean = float(dens.mean())
    contrast = (dmax - dmin) / (dmax + dmin) if dmax + dmin > 0 else 0.0
    rel_std = float(dens.std() / mean) if mean > 0 else 0.0
    return (
        DensityStats(
            k_peak=spec.k_peak,
            k_field=spec.k_field,
            contrast=contrast,
            rel_std=rel_std,
            mean_density=mean,
        ),
        dens,
    )


def analyze_run(
    records: list[ObservableRecord],
    series: RoiSeries,
    params: ModelParams,
    grid: Grid2D,
    summary: RunSummary,
    g1_window: float = 100.0,
    eta_window: float = 500.0,
    g1_long_window: float | None = 500.0,
    thresholds: ClassifierThresholds | None = None,
) -> RunAnalysis:
    """Post-run reduction: coherence, energy ratio, density metrics, label.

    Analysis windows are trailing intervals of the run; ``g1_window`` is the
    classification window, ``g1_long_window`` the longer coherence-map window
    (skipped when the run is too short).
    """
    t_last = float(series.t[-1])
    coh = g1(series, t_last - g1_window, t_last)
    coh_long = None
    if g1_long_window is not None and series.t[0] <= t_last - g1_long_window + 1e-9:
        coh_long = g1(series, t_last - g1_long_window, t_last)
    window_records = [r for r in records if r.t >= t_last - eta_window - 1e-9]
    etas = np.array([r.eta for r in window_records])
    dstats, dens = density_stats(series, grid.dx, t_last - g1_window, t_last)
    mean_vort = float(np.mean([r.n_vortices for r in window_records]))
    label = classify_run(
        coh, window_records, dstats, params, thresholds, mean_vortices=mean_vort
    )
    return RunAnalysis(
        summary=summary,
        records=records,
        coherence=coh,
        coherence_long=coh_long,
        eta=float(etas.mean()),
        eta_std=float(etas.std()),
        density=dstats,
        label=label,
        mean_vortices=mean_vort,
        tavg_density=dens,
        roi_series=series,
        blow_up_t=None,
    )


def simulate_point(
    params: ModelParams,
    pump: PumpSpec,
    disorder: DisorderSpec,
    config: SolverConfig,
    grid: Grid2D,
    roi: Roi | None = None,
    g1_window: float = 100.0,
    eta_window: float = 500.0,
    thresholds: ClassifierThresholds | None = None,
    extra_sinks: tuple = (),
    drive: DriveFields | None = None,
) -> RunAnalysis:
    """Run one configuration from an empty state and reduce it to a RunAnalysis."""
    roi = roi or Roi()
    _check_roi_clear_of_absorber(grid, roi, config.absorber_margin)
    if drive is None:
        drive = build_drive(params, pump, disorder, grid, config)
    obs = ObservableSink(roi)
    stack = RoiStackSink(roi)
    initial = empty_fields(grid)
    summary = run(initial, params, drive, config, sinks=(obs, stack) + tuple(extra_sinks))
    return analyze_run(
        obs.records,
        stack.series(),
        params,
        grid,
        summary,
        g1_window=g1_window,
        eta_window=eta_window,
        thresholds=thresholds,
    )


def _check_roi_clear_of_absorber(grid: Grid2D, roi: Roi, margin: float) -> None:
    sy, sx = roi.resolve(grid)
    x = grid.x
    lo = x[0] + margin
    hi = x[-1] - margin
    for s in (sx, sy):
        if x[s.start] < lo - 1e-9 or x[s.stop - 1] > hi + 1e-9:
            raise ValueError(
                f"observation window {roi} overlaps the absorbing margin "
                f"(clear interior is [{lo}, {hi}])"
            )
