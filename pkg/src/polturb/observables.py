"""Diagnostics: densities, fractions, energies, spectra, coherence, vortices.

All operations are pure functions over immutable snapshots.  Reductions are
accumulated in double precision regardless of the snapshot dtype.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .grid import FieldPair, Grid2D, Roi

#: fraction / vortex density floor relative to the mean density
DENSITY_FLOOR_REL = 1e-6


class ZeroDensityError(ValueError):
    """An energy functional is undefined on an empty region."""


@dataclass
class Fractions:
    f_c: np.ndarray
    f_x: np.ndarray
    valid: np.ndarray  # False where the total density sat below the floor


def fractions(fields: FieldPair, density_floor: float | None = None) -> Fractions:
    """Local photonic and excitonic density shares of the quasiparticles.

    Where the total density falls below the floor the composition is
    undefined; those pixels carry the 0.5/0.5 sentinel and are flagged.
    """
    n_c = np.abs(fields.psi_c.astype(np.complex128)) ** 2
    n_x = np.abs(fields.psi_x.astype(np.complex128)) ** 2
    total = n_c + n_x
    if density_floor is None:
        density_floor = DENSITY_FLOOR_REL * float(total.mean())
    valid = total > density_floor
    safe = np.where(valid, total, 1.0)
    f_c = np.where(valid, n_c / safe, 0.5)
    f_x = np.where(valid, n_x / safe, 0.5)
    return Fractions(f_c=f_c, f_x=f_x, valid=valid)


def _spectral_gradient_sq(psi: np.ndarray, grid: Grid2D) -> np.ndarray:
    """|grad psi|^2 evaluated spectrally on the full periodic grid."""
    spec = sfft.fft2(psi.astype(np.complex128))
    kx = grid.kx
    gx = sfft.ifft2(spec * (1j * kx[None, :]))
    gy = sfft.ifft2(spec * (1j * kx[:, None]))
    return np.abs(gx) ** 2 + np.abs(gy) ** 2


def kinetic_energy(fields: FieldPair, roi: Roi) -> float:
    """Photon-weighted kinetic energy per polariton over the window.

    integral f_C |grad psi_C|^2 / integral |psi_C|^2, with the gradient taken
    spectrally on the full grid before the window restriction.
    """
    sy, sx = roi.resolve(fields.grid)
    grad2 = _spectral_gradient_sq(fields.psi_c, fields.grid)[sy, sx]
    f_c = fractions(fields).f_c[sy, sx]
    n_c = np.abs(fields.psi_c[sy, sx].astype(np.complex128)) ** 2
    norm = float(n_c.sum())
    if norm == 0.0:
        raise ZeroDensityError("kinetic energy undefined: zero photon norm in roi")
    return float((f_c * grad2).sum() / norm)


def interaction_energy(fields: FieldPair, roi: Roi) -> float:
    """Mean-field interaction energy per polariton: <f_X |psi_X|^2> over the window."""
    sy, sx = roi.resolve(fields.grid)
    f_x = fractions(fields).f_x[sy, sx]
    n_x = np.abs(fields.psi_x[sy, sx].astype(np.complex128)) ** 2
    return float((f_x * n_x).mean())


@dataclass
class ObservableRecord:
    """Diagnostics of one snapshot over the observation window.

    The normalized spectrum map is only retained when requested; long runs
    keep the scalar ``k_peak`` and recompute maps from stored snapshots.
    """

    t: float
    n_c: float                 # mean photon density
    f_x: float                 # mean excitonic fraction
    f_c: float
    e_kin: float
    e_int: float
    eta: float
    k_peak: float              # density-spectrum peak wavevector
    vortices: list = field(default_factory=list)
    spectrum: "SpectrumResult | None" = None

    @property
    def n_vortices(self) -> int:
        return len(self.vortices)


@dataclass
class SpectrumResult:
    """Normalized momentum-space distribution of the window photon density."""

    map: np.ndarray            # |DFT(n_C - <n_C>)|, unit peak, fftshifted
    kx: np.ndarray
    ky: np.ndarray
    k_peak: float              # |k| of the dominant bin (density wavevector)
    radial_k: np.ndarray
    radial_profile: np.ndarray

    @property
    def k_field(self) -> float:
        """Inferred field wavevector: density standing waves sit at 2 k_field."""
        return 0.5 * self.k_peak


def momentum_spectrum(fields: FieldPair, roi: Roi, pad_factor: int = 4) -> SpectrumResult:
    sy, sx = roi.resolve(fields.grid)
    n_c = np.abs(fields.psi_c[sy, sx].astype(np.complex128)) ** 2
    return density_spectrum(n_c, fields.grid.dx, pad_factor)


def density_spectrum(n_c: np.ndarray, dx: float, pad_factor: int = 4) -> SpectrumResult:
    """Spectrum of a real density map (mean removed, zero-padded, unit peak)."""
    scale = float(np.abs(n_c).sum())
    centered = n_c - n_c.mean()
    ny, nx = centered.shape
    spec = np.abs(sfft.fft2(centered, s=(pad_factor * ny, pad_factor * nx)))
    spec = sfft.fftshift(spec)
    kx = sfft.fftshift(2.0 * np.pi * sfft.fftfreq(pad_factor * nx, d=dx))
    ky = sfft.fftshift(2.0 * np.pi * sfft.fftfreq(pad_factor * ny, d=dx))
    peak = float(spec.max())
    if peak <= 1e-12 * max(scale, 1e-300):
        # uniform density: no structure beyond rounding; leave unnormalized
        k_peak = 0.0
    else:
        spec = spec / peak
        iy, ix = np.unravel_index(int(np.argmax(spec)), spec.shape)
        k_peak = float(np.hypot(kx[ix], ky[iy]))
    kxx, kyy = np.meshgrid(kx, ky)
    kr = np.hypot(kxx, kyy)
    dk = 2.0 * np.pi / (nx * dx)
    bins = np.arange(0.0, kr.max() + dk, dk)
    idx = np.digitize(kr.ravel(), bins)
    sums = np.bincount(idx, weights=spec.ravel(), minlength=bins.size + 1)
    counts = np.bincount(idx, minlength=bins.size + 1)
    radial = sums[1 : bins.size] / np.maximum(counts[1 : bins.size], 1)
    return SpectrumResult(
        map=spec,
        kx=kx,
        ky=ky,
        k_peak=k_peak,
        radial_k=bins[:-1] + 0.5 * dk,
        radial_profile=radial,
    )


@dataclass
class RoiSeries:
    """Time series of window snapshots of the photon field."""

    t: np.ndarray              # (N,)
    data: np.ndarray           # (N, h, w) complex

    def select(self, t_start: float, t_end: float) -> "RoiSeries":
        m = (self.t >= t_start - 1e-9) & (self.t <= t_end + 1e-9)
        return RoiSeries(self.t[m], self.data[m])


@dataclass
class CoherenceResult:
    g1_map: np.ndarray         # NaN where the temporal second moment vanished
    g1_scalar: float
    window: tuple[float, float, int]


def g1(series: RoiSeries, t_start: float | None = None, t_end: float | None = None) -> CoherenceResult:
    """Time-averaged first-order coherence |<psi>_t| / sqrt(<|psi|^2>_t) per pixel.

    Requires at least 10 evenly spaced samples inside the window.  Pixels with
    vanishing temporal second moment are excluded from the spatial mean.
    """
    if t_start is None:
        t_start = float(series.t[0])
    if t_end is None:
        t_end = float(series.t[-1])
    sel = series.select(t_start, t_end)
    n = sel.t.size
    if n < 10:
        raise ValueError(f"need >= 10 samples in the window, got {n}")
    steps = np.diff(sel.t)
    if steps.size and (steps.max() - steps.min()) > 1e-6 * max(steps.max(), 1e-300):
        raise ValueError("samples are not evenly spaced in the window")
    data = sel.data.astype(np.complex128)
    num = np.abs(data.mean(axis=0))
    den2 = (data.real**2 + data.imag**2).mean(axis=0)
    valid = den2 > 0.0
    g1_map = np.full(num.shape, np.nan)
    g1_map[valid] = num[valid] / np.sqrt(den2[valid])
    if not valid.any():
        raise ZeroDensityError("coherence undefined: window is identically empty")
    scalar = float(g1_map[valid].mean())
    return CoherenceResult(g1_map=g1_map, g1_scalar=scalar, window=(t_start, t_end, n))


def _wrap_phase(dphi: np.ndarray) -> np.ndarray:
    return (dphi + np.pi) % (2.0 * np.pi) - np.pi


def detect_vortices(
    fields: FieldPair, roi: Roi, density_floor: float | None = None
) -> list[tuple[float, float, int]]:
    """Phase-winding vortex detection on grid plaquettes inside the window.

    For every plaquette whose four corner densities exceed the floor, the
    wrapped phase differences around the loop are summed; windings of +/-2 pi
    are reported as charge +/-1 at the plaquette center.
    """
    sy, sx = roi.resolve(fields.grid)
    psi = fields.psi_c[sy, sx]
    n_c = np.abs(psi.astype(np.complex128)) ** 2
    if density_floor is None:
        density_floor = DENSITY_FLOOR_REL * float(n_c.mean())
    theta = np.angle(psi)
    d_right = _wrap_phase(theta[:-1, 1:] - theta[:-1, :-1])
    d_up = _wrap_phase(theta[1:, 1:] - theta[:-1, 1:])
    d_left = _wrap_phase(theta[1:, :-1] - theta[1:, 1:])
    d_down = _wrap_phase(theta[:-1, :-1] - theta[1:, :-1])
    winding = d_right + d_up + d_left + d_down
    dense = (
        (n_c[:-1, :-1] > density_floor)
        & (n_c[:-1, 1:] > density_floor)
        & (n_c[1:, :-1] > density_floor)
        & (n_c[1:, 1:] > density_floor)
    )
    charged = dense & (np.abs(winding) > np.pi)
    iy, ix = np.nonzero(charged)
    x = fields.grid.x
    dx = fields.grid.dx
    x0 = x[sx][0]
    y0 = x[sy][0]
    out = []
    for i, j in zip(iy, ix):
        charge = int(np.round(winding[i, j] / (2.0 * np.pi)))
        out.append((float(x0 + (j + 0.5) * dx), float(y0 + (i + 0.5) * dx), charge))
    return out


def eta_time_average(records: list[ObservableRecord], window: float) -> tuple[float, float]:
    """Mean and standard deviation of the energy ratio over the trailing window."""
    if not records:
        raise ValueError("no records")
    t_last = records[-1].t
    t_first = records[0].t
    if window > t_last - t_first + 1e-9:
        raise ValueError(
            f"window {window} exceeds record span [{t_first}, {t_last}]"
        )
    vals = np.array([r.eta for r in records if r.t >= t_last - window - 1e-9])
    return float(vals.mean()), float(vals.std())


def convergence_error(
    candidate: FieldPair,
    reference: FieldPair,
    window_side: float = 10.0,
    time_tol: float = 1e-9,
) -> float:
    """Relative squared deviation over a centered window of side ``window_side``.

    sum |psi - psi_ref|^2 / sum |psi_ref|^2, summed over both field
    components.  The reference grid must contain every candidate point of the
    window (same physical coordinates), so refinements in dx or L are compared
    by index mapping without interpolation.
    """
    if abs(candidate.t - reference.t) > time_tol:
        raise ValueError(
            f"snapshot times differ: {candidate.t} vs {reference.t}"
        )
    window = Roi(size=(window_side, window_side))
    cy, cx = window.resolve(candidate.grid)
    ix_map = _index_map(candidate.grid, reference.grid)
    ry = ix_map[np.arange(cy.start, cy.stop)]
    rx = ix_map[np.arange(cx.start, cx.stop)]
    num = 0.0
    den = 0.0
    for cand, ref in ((candidate.psi_c, reference.psi_c), (candidate.psi_x, reference.psi_x)):
        c = cand[cy, cx].astype(np.complex128)
        r = ref[np.ix_(ry, rx)].astype(np.complex128)
        num += float(np.sum(np.abs(c - r) ** 2))
        den += float(np.sum(np.abs(r) ** 2))
    if den == 0.0:
        raise ZeroDensityError("convergence error undefined: empty reference window")
    return num / den


def _index_map(coarse: Grid2D, fine: Grid2D) -> np.ndarray:
    """Indices of the coarse axis coordinates inside the fine axis."""
    xc = coarse.x
    xf = fine.x
    idx = np.searchsorted(xf, xc - 1e-9 * max(coarse.dx, 1.0))
    idx = np.clip(idx, 0, xf.size - 1)
    if not np.allclose(xf[idx], xc, atol=1e-9 * max(1.0, coarse.dx)):
        raise ValueError(
            "reference grid does not contain the candidate grid points; "
            f"coarse dx={coarse.dx} L={coarse.length}, fine dx={fine.dx} L={fine.length}"
        )
    return idx


def roi_mean_density(fields: FieldPair, roi: Roi) -> float:
    sy, sx = roi.resolve(fields.grid)
    return float((np.abs(fields.psi_c[sy, sx].astype(np.complex128)) ** 2).mean())


def snapshot_record(
    fields: FieldPair, roi: Roi, count_vortices: bool = True,
    keep_spectrum: bool = False,
) -> ObservableRecord:
    """All scalar diagnostics of one snapshot.

    An empty window (e.g. the initial state of a ramped run) yields NaN
    energies rather than an error so streamed records stay aligned with the
    snapshot cadence.
    """
    sy, sx = roi.resolve(fields.grid)
    frac = fractions(fields)
    n_c_map = np.abs(fields.psi_c[sy, sx].astype(np.complex128)) ** 2
    try:
        e_kin = kinetic_energy(fields, roi)
    except ZeroDensityError:
        return ObservableRecord(
            t=fields.t, n_c=0.0, f_x=0.5, f_c=0.5,
            e_kin=np.nan, e_int=np.nan, eta=np.nan, k_peak=0.0, vortices=[],
        )
    e_int = interaction_energy(fields, roi)
    spec = momentum_spectrum(fields, roi)
    vortices = detect_vortices(fields, roi) if count_vortices else []
    return ObservableRecord(
        t=fields.t,
        n_c=float(n_c_map.mean()),
        f_x=float(frac.f_x[sy, sx].mean()),
        f_c=float(frac.f_c[sy, sx].mean()),
        e_kin=e_kin,
        e_int=e_int,
        eta=e_int / e_kin if e_kin > 0 else np.inf,
        k_peak=spec.k_peak,
        vortices=vortices,
        spectrum=spec if keep_spectrum else None,
    )
