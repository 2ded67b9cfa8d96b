"""Spectral simulator for counter-propagating 2D polariton quantum fluids."""

from .classify import (
    ClassifierThresholds,
    CrossProbabilityTable,
    DensityStats,
    RegimeLabel,
    classify_run,
    cross_probability,
)
from .drive import DisorderSpec, PumpSpec, pump_profile, ramp, sample_disorder
from .grid import FieldPair, Grid2D, Roi, empty_fields, forward_spectrum, make_grid, roi_view
from .observables import (
    CoherenceResult,
    ObservableRecord,
    RoiSeries,
    convergence_error,
    detect_vortices,
    eta_time_average,
    fractions,
    g1,
    interaction_energy,
    kinetic_energy,
    momentum_spectrum,
)
from .params import (
    ModelParams,
    NoResonanceError,
    dimensionalize,
    frame_detunings,
    lp_up_dispersion,
    nondimensionalize,
    resonant_wavevector,
)
from .pipeline import RunAnalysis, analyze_run, simulate_point
from .solver import (
    BlowUpError,
    DriveFields,
    PrecomputedPropagator,
    RunSummary,
    SolverConfig,
    build_absorber,
    build_drive,
    run,
    step,
)
from .sweep import (
    CellSpec,
    PhaseCell,
    SweepPlan,
    convergence_harness,
    grid_cells,
    interpolate_diagram,
    run_sweep,
)

__version__ = "0.1.0"
