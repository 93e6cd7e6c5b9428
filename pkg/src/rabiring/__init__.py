"""Mean-field and Bogoliubov toolkit for a ring of coupled Rabi cavities.

The ring couples N cavity modes by complex photon hopping J e^{i theta}
while each cavity hosts a two-level system in the deep dispersive
regime.  The package maps the ground-state phase diagram (normal,
ferro, antiferro and two chiral superradiant phases), the circulating
photon currents, the winding of the order parameter, the excitation
spectra on top of any mean-field configuration, and the critical
scaling of the gap near the second-order boundaries.
"""

from .bogoliubov import (
    ExcitationSpectrum,
    QuadraticForm,
    bilinear_matrix,
    excitation_spectrum,
)
from .criticality import (
    GapCurve,
    PhaseCell,
    ScalingFit,
    SweepPoint,
    current_sweep,
    fit_exponent,
    gap_curve,
    halved_window,
    phase_diagram,
)
from .errors import (
    AmbiguousWindingError,
    ConvergenceError,
    InsufficientPointsError,
    PairingError,
    SingularDenominatorError,
    WindingUndefinedError,
)
from .meanfield import (
    MeanFieldConfiguration,
    MinimizeResult,
    MinimizeStrategy,
    NewtonResult,
    SolverReport,
    b_from_a,
    classify_solution,
    closed_form_afsr,
    closed_form_csr,
    closed_form_fsr,
    ground_energy,
    minimize_energy,
    newton_refine,
    reduced_residual,
    residual_jacobian,
    residual_norm,
    site_quantities,
    stationarity_residuals,
)
from .model import (
    PHASE_KINDS,
    PhaseLabel,
    RingParameters,
    constant_energy,
    symmetry_orbit,
)
from .normal_phase import (
    ThetaClassification,
    classify_theta,
    critical_coupling,
    dispersion,
    momentum_grid,
    np_excitation,
    phase_boundaries,
    phase_census,
)
from .observables import (
    CurrentReport,
    MagneticCouplings,
    SpinField,
    current_report,
    magnetic_couplings,
    ring_current,
    spin_vectors,
    subring_currents,
    winding_number,
)

__version__ = "0.1.0"

__all__ = [
    "AmbiguousWindingError",
    "ConvergenceError",
    "CurrentReport",
    "ExcitationSpectrum",
    "GapCurve",
    "InsufficientPointsError",
    "MagneticCouplings",
    "MeanFieldConfiguration",
    "MinimizeResult",
    "MinimizeStrategy",
    "NewtonResult",
    "PHASE_KINDS",
    "PairingError",
    "PhaseCell",
    "PhaseLabel",
    "QuadraticForm",
    "RingParameters",
    "ScalingFit",
    "SingularDenominatorError",
    "SolverReport",
    "SpinField",
    "SweepPoint",
    "ThetaClassification",
    "WindingUndefinedError",
    "b_from_a",
    "bilinear_matrix",
    "classify_solution",
    "classify_theta",
    "closed_form_afsr",
    "closed_form_csr",
    "closed_form_fsr",
    "constant_energy",
    "critical_coupling",
    "current_report",
    "current_sweep",
    "dispersion",
    "excitation_spectrum",
    "fit_exponent",
    "gap_curve",
    "ground_energy",
    "halved_window",
    "magnetic_couplings",
    "minimize_energy",
    "momentum_grid",
    "newton_refine",
    "np_excitation",
    "phase_boundaries",
    "phase_census",
    "phase_diagram",
    "reduced_residual",
    "residual_jacobian",
    "residual_norm",
    "ring_current",
    "site_quantities",
    "spin_vectors",
    "stationarity_residuals",
    "subring_currents",
    "symmetry_orbit",
    "winding_number",
]
