"""Decoherence and fragment fidelities for a charge in a thermal field, and how close they come to a broadcast structure.

Dimensionless throughout: time s = Omega t in units of the field cutoff,
momenta in units of m0 c, and theta = hbar Omega / (k_B T).
"""

from .decoherence import (
    DecoherenceResult,
    Regime,
    dipole_validity_time,
    gamma_curve,
    gamma_exact,
    gamma_regime,
    gamma_relativistic_correction,
    gamma_unexpanded,
)
from .errors import (
    ConfigError,
    DegenerateFrame,
    DopplerSingularity,
    LargePatchWarning,
    LowThermalRatioWarning,
    NumericalIndefiniteness,
    QedSbsError,
    QuadratureFailure,
    RegimeBoundary,
    TruncationTooSmall,
    ValidityWarning,
)
from .fidelity import (
    FidelityResult,
    Macrofraction,
    b_floor,
    fidelity_regime,
    log_b_macrofraction_exact,
    log_b_mode,
    log_b_small_patch,
)
from .geometry import Complement, FullSphere, PatchAround, PolarCap, Union, Weight, angular_moments
from .model import PhysicalScenario, displacement_amplitude, doppler_factor, tau_f_over_cutoff
from .sbs import MomentumGrid, SbsReport, Tiling, pointer_probabilities, reconstruct_momentum, redundancy_count, sbs_report, tile_region

__version__ = "0.1.0"
