"""A-posteriori regime classification and energy-ratio cross statistics."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .observables import CoherenceResult, ObservableRecord
from .params import ModelParams, NoResonanceError, resonant_wavevector

REGIMES = ("linear", "solitonic", "turbulent", "superfluid")


@dataclass
class ClassifierThresholds:
    """Decision-tree cutoffs; all config-exposed.

    ``g1_turbulent`` separates nonstationary runs; stationary runs then split
    on the inferred field wavevector and the flatness/contrast of the
    time-averaged window density.
    """

    g1_turbulent: float = 0.95
    k_linear_tol: float = 0.1
    contrast_fringes: float = 0.5
    k_superfluid: float = 0.15
    rel_std_flat: float = 0.15
    min_span: float = 500.0  # required record coverage


@dataclass
class DensityStats:
    """Metrics of the time-averaged window density over the analysis window."""

    k_peak: float            # density-spectrum peak (standing waves: 2 k_field)
    k_field: float           # inferred field wavevector, k_peak / 2
    contrast: float          # (max - min)/(max + min)
    rel_std: float           # spatial std / mean
    mean_density: float


@dataclass
class RegimeLabel:
    label: str
    evidence: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


class InsufficientRecordsError(ValueError):
    pass


def classify_run(
    coherence: CoherenceResult,
    records: list[ObservableRecord],
    density: DensityStats,
    params: ModelParams,
    thresholds: ClassifierThresholds | None = None,
    mean_vortices: float | None = None,
) -> RegimeLabel:
    """Label a run as linear / solitonic / turbulent / superfluid.

    Decision tree: reduced temporal coherence marks turbulence; among
    stationary runs, a fringe pattern at the resonant wavevector is linear, a
    flat low-momentum state is superfluid, anything else solitonic.
    """
    th = thresholds or ClassifierThresholds()
    if not records:
        raise InsufficientRecordsError("no observable records")
    span = records[-1].t - records[0].t
    if span + 1e-9 < th.min_span:
        raise InsufficientRecordsError(
            f"records span {span}, need >= {th.min_span} of evolution"
        )
    etas = np.array([r.eta for r in records])
    if mean_vortices is None:
        mean_vortices = float(np.mean([r.n_vortices for r in records]))
    try:
        k_res = resonant_wavevector(params.delta_lp)
    except NoResonanceError:
        k_res = np.nan
    evidence = {
        "g1_scalar": coherence.g1_scalar,
        "eta": float(etas.mean()),
        "k_field": density.k_field,
        "k_resonant": k_res,
        "density_contrast": density.contrast,
        "density_rel_std": density.rel_std,
        "mean_vortices": mean_vortices,
        "thresholds": asdict(th),
    }
    return RegimeLabel(decide_label(evidence, th), evidence)


def decide_label(evidence: dict, th: ClassifierThresholds) -> str:
    """The decision tree over an evidence vector (shared with re-labeling)."""
    if evidence["g1_scalar"] < th.g1_turbulent:
        return "turbulent"
    k_res = evidence.get("k_resonant")
    if (
        k_res is not None
        and np.isfinite(k_res)
        and abs(evidence["k_field"] - k_res) < th.k_linear_tol
        and evidence["density_contrast"] > th.contrast_fringes
    ):
        return "linear"
    if (
        evidence["k_field"] < th.k_superfluid
        and evidence["density_rel_std"] < th.rel_std_flat
    ):
        return "superfluid"
    return "solitonic"


@dataclass
class CrossProbabilityTable:
    """Interval-conditional label frequencies per reference regime.

    Row R holds P(label = T | eta within one sigma of regime R's mean); rows
    with an empty interval are flagged undefined and filled with NaN.
    """

    regimes: tuple
    eta_mean: dict
    eta_std: dict
    matrix: np.ndarray          # rows: reference regime, cols: target label
    counts: np.ndarray
    undefined: tuple

    def row(self, regime: str) -> dict:
        i = self.regimes.index(regime)
        return {t: float(self.matrix[i, j]) for j, t in enumerate(self.regimes)}


def cross_probability(labeled_runs: list[tuple]) -> CrossProbabilityTable:
    """Build the cross-probability table from (label, eta) pairs.

    ``labeled_runs`` items may carry a RegimeLabel or a plain label string.
    Requires at least two runs per represented regime.
    """
    labels = []
    etas = []
    for lab, eta in labeled_runs:
        labels.append(lab.label if isinstance(lab, RegimeLabel) else str(lab))
        etas.append(float(eta))
    labels = np.array(labels)
    etas = np.array(etas)
    present = tuple(r for r in REGIMES if (labels == r).any())
    for r in present:
        if (labels == r).sum() < 2:
            raise ValueError(f"need >= 2 runs per regime, got 1 for {r!r}")
    eta_mean = {r: float(etas[labels == r].mean()) for r in present}
    eta_std = {r: float(etas[labels == r].std()) for r in present}
    n = len(present)
    matrix = np.full((n, n), np.nan)
    counts = np.zeros((n, n), dtype=int)
    undefined = []
    for i, ref in enumerate(present):
        lo = eta_mean[ref] - eta_std[ref]
        hi = eta_mean[ref] + eta_std[ref]
        inside = (etas >= lo) & (etas <= hi)
        total = int(inside.sum())
        if total == 0:
            undefined.append(ref)
            continue
        for j, tgt in enumerate(present):
            counts[i, j] = int((inside & (labels == tgt)).sum())
            matrix[i, j] = counts[i, j] / total
    return CrossProbabilityTable(
        regimes=present,
        eta_mean=eta_mean,
        eta_std=eta_std,
        matrix=matrix,
        counts=counts,
        undefined=tuple(undefined),
    )
