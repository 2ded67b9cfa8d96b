"""Model parameters, unit conversions and polariton dispersion relations.

Everything downstream of this module works in dimensionless units: energies in
units of half the Rabi coupling, times in units of the Rabi period scale
tau0 = 2/Omega, lengths in units of l0 = sqrt(hbar/(m_C Omega)).  This module
holds the dimensional anchors and the conversions between the two pictures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

# hbar in meV*ps and the electron mass in kg (CODATA)
HBAR_MEV_PS = 0.6582119569
HBAR_J_S = 1.054571817e-34
ELECTRON_MASS_KG = 9.1093837015e-31
# hc in eV*nm, for converting the pump wavelength to a photon energy
HC_EV_NM = 1239.841984
EV_TO_J = 1.602176634e-19

#: conversion tags accepted by :func:`dimensionalize`
QUANTITY_TAGS = ("time", "length", "field", "pump_flux", "rate", "energy")


class NoResonanceError(ValueError):
    """The pump detuning admits no propagating lower-polariton wavevector."""


@dataclass
class ModelParams:
    """Dimensionless equation coefficients plus their dimensional anchors.

    Defaults correspond to a GaAs microcavity with a 3.3 meV Rabi splitting:
    ``rabi_half`` is hbar*Omega in meV (half the splitting), ``g_x`` is the
    exciton interaction constant hbar*g_X in meV*um^2, and the decay rates,
    detunings and pump wavevector are dimensionless.
    """

    rabi_half: float = 1.65              # hbar*Omega [meV]
    photon_mass_ratio: float = 2.4e-5    # m_C / m_e
    g_x: float = 0.003                   # hbar*g_X [meV*um^2]
    gamma_c: float = 0.02                # photon decay (dimensionless)
    gamma_x: float = 0.02                # exciton decay (dimensionless)
    delta_lp: float = 0.22               # pump detuning from LP(k=0)
    delta_c: float | None = None         # photon frame detuning; derived if None
    delta_x: float | None = None         # exciton frame detuning; derived if None
    k_p: float = 0.4                     # pump wavevector (dimensionless)
    length_unit: float | None = None     # l0 [um]; derived if None
    time_unit: float | None = None       # tau0 [ps]; derived if None
    photon_wavelength: float = 854.0     # pump laser wavelength [nm]

    def __post_init__(self) -> None:
        if self.delta_c is None or self.delta_x is None:
            dc, dx = frame_detunings(self.delta_lp)
            if self.delta_c is None:
                self.delta_c = dc
            if self.delta_x is None:
                self.delta_x = dx
        if self.length_unit is None:
            self.length_unit = self._derived_length_unit()
        if self.time_unit is None:
            self.time_unit = self._derived_time_unit()

    # dimensional scales -------------------------------------------------

    @property
    def omega(self) -> float:
        """Rabi coupling Omega in 1/ps."""
        return self.rabi_half / HBAR_MEV_PS

    @property
    def energy_unit(self) -> float:
        """Energy unit hbar*Omega/2 in meV."""
        return self.rabi_half / 2.0

    @property
    def rate_unit(self) -> float:
        """Rate unit Omega/2 in 1/ps."""
        return self.omega / 2.0

    @property
    def field_unit(self) -> float:
        """Field amplitude unit sqrt(Omega/(2 g_X)) in 1/um."""
        return math.sqrt(self.rabi_half / (2.0 * self.g_x))

    @property
    def flux_unit(self) -> float:
        """Pump flux unit (Omega/(2 sqrt(g_X)))^2 in 1/(um^2 ps)."""
        return self.rate_unit * self.field_unit**2

    def _derived_time_unit(self) -> float:
        return 2.0 / self.omega

    def _derived_length_unit(self) -> float:
        m_c = self.photon_mass_ratio * ELECTRON_MASS_KG
        omega_si = self.omega * 1e12
        return math.sqrt(HBAR_J_S / (m_c * omega_si)) * 1e6

    def validate(self) -> None:
        """Check internal consistency of the stored anchors and detunings."""
        for name, stored, derived in (
            ("length_unit", self.length_unit, self._derived_length_unit()),
            ("time_unit", self.time_unit, self._derived_time_unit()),
        ):
            if abs(stored - derived) > 1e-9 * abs(derived):
                raise ValueError(
                    f"{name}={stored} inconsistent with rabi_half-derived "
                    f"value {derived}"
                )
        if self.gamma_c != self.gamma_x:
            raise ValueError(
                "unequal decay rates are not supported by the standard "
                f"configuration: gamma_c={self.gamma_c}, gamma_x={self.gamma_x}"
            )

    def as_dict(self) -> dict:
        return asdict(self)


def frame_detunings(delta_lp: float) -> tuple[float, float]:
    """Map the pump-vs-LP detuning onto the photon/exciton frame detunings.

    In the pump rotating frame the linear k=0 block is
    ``[[-delta_c, -2], [-2, -delta_x]]``; requiring its lower eigenvalue to sit
    at ``-delta_lp`` (resonant photon-exciton case) gives
    ``delta_c = delta_x = delta_lp - 2``.
    """
    d = delta_lp - 2.0
    return d, d


def dimensionalize(params: ModelParams, value, tag: str):
    """Convert a tagged dimensionless quantity to physical units.

    Units by tag: time -> ps, length -> um, field -> 1/um,
    pump_flux -> 1/(um^2 ps), rate -> 1/ps, energy -> meV.
    """
    return np.asarray(value) * _unit_factor(params, tag)


def nondimensionalize(params: ModelParams, value, tag: str):
    """Inverse of :func:`dimensionalize`."""
    return np.asarray(value) / _unit_factor(params, tag)


def _unit_factor(params: ModelParams, tag: str) -> float:
    if tag == "time":
        return params.time_unit
    if tag == "length":
        return params.length_unit
    if tag == "field":
        return params.field_unit
    if tag == "pump_flux":
        return params.flux_unit
    if tag == "rate":
        return params.rate_unit
    if tag == "energy":
        return params.energy_unit
    raise ValueError(f"unknown quantity tag {tag!r}; expected one of {QUANTITY_TAGS}")


def lp_up_dispersion(params: ModelParams, k) -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper polariton branch energies in meV at dimensionless k.

    Resonant case (flat exciton branch crossing the photon branch at k=0),
    referenced so that E_LP(k=0) = 0.  The photon kinetic term is k^2 in units
    of the energy unit, hence the branches are
    ``k^2/2 + 2 -/+ sqrt(k^4/4 + 4)`` before rescaling.
    """
    k = np.asarray(k, dtype=float)
    half_kin = 0.5 * k * k
    root = np.sqrt(half_kin**2 + 4.0)
    e_lp = (half_kin + 2.0 - root) * params.energy_unit
    e_up = (half_kin + 2.0 + root) * params.energy_unit
    return e_lp, e_up


def linear_matrix(params: ModelParams, k) -> np.ndarray:
    """Rotating-frame linear block M(k) of the coupled field equations.

    For scalar k returns a (2, 2) complex array; for an array of k values the
    leading axes of k are preserved and the matrix axes appended.
    """
    k = np.asarray(k, dtype=float)
    m = np.zeros(k.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = -params.delta_c + k * k - 0.5j * params.gamma_c
    m[..., 0, 1] = -2.0
    m[..., 1, 0] = -2.0
    m[..., 1, 1] = -params.delta_x - 0.5j * params.gamma_x
    return m


def lp_eigenvalue(delta_lp: float, k) -> np.ndarray:
    """Lower-branch eigenvalue of the lossless rotating-frame linear block."""
    d = delta_lp - 2.0
    k = np.asarray(k, dtype=float)
    k2 = k * k
    return -d + 0.5 * k2 - 0.5 * np.sqrt(k2 * k2 + 16.0)


def resonant_wavevector(delta_lp: float) -> float:
    """Wavevector where the lower polariton is resonant with the pump.

    Solves ``lp_eigenvalue(delta_lp, k) = 0``; closed form
    ``k^2 = (d^2 - 4)/d`` with ``d = delta_lp - 2``.  Real solutions exist for
    0 < delta_lp < 2 only.
    """
    if not 0.0 < delta_lp < 2.0:
        raise NoResonanceError(
            f"no propagating resonance for delta_lp={delta_lp}; need 0 < delta < 2"
        )
    d = delta_lp - 2.0
    return math.sqrt((d * d - 4.0) / d)


def pump_intensity_mw_per_um2(params: ModelParams, f_inc: float) -> dict:
    """Physical intensity estimates for a dimensionless pump amplitude.

    The quantum-flux conversion multiplies the tabulated flux unit by the
    photon energy of the pump laser.  Experimental reports for comparable
    drives differ from this by about a factor of two (incident versus
    intracavity flux conventions are ambiguous), so both numbers are returned.
    """
    photon_energy_ev = HC_EV_NM / params.photon_wavelength
    flux_per_um2_ps = f_inc**2 * params.flux_unit
    watts_per_um2 = flux_per_um2_ps * 1e12 * photon_energy_ev * EV_TO_J
    base = watts_per_um2 * 1e3
    return {
        "quantum_flux_mw_per_um2": base,
        "incident_2x_mw_per_um2": 2.0 * base,
        "photon_energy_ev": photon_energy_ev,
    }
