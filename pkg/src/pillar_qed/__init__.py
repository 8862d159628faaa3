"""Reflection spectroscopy of a quantum dot coupled to a pillar microcavity.

Simulation of the coupled-system reflection amplitude, the two-beam
polarization interferometer reading out its phase, parameter estimation by
damped least squares, temperature-tuned anticrossing scans, and design
sweeps of the outcoupling rate.
"""

from .design import (
    DesignPoint,
    conditional_phase_spectrum,
    interface_feasible,
    max_conditional_phase,
    relative_phase,
    sweep_kappa,
)
from .estimation import (
    FitProblem,
    FitResult,
    estimate_g_from_splitting,
    estimate_q_from_linewidth,
    fit,
    make_guess,
    residuals,
    uncertainty,
)
from .interferometer import (
    BackgroundModel,
    ChannelRecord,
    ReferenceArm,
    apply_background,
    conditional_fringe_phase,
    dip_visibility,
    extract_phase,
    fringe_phase,
    infer_background_fraction,
    invert_background,
    measured_intensity,
    quadrature_offset,
    simulate_channels,
)
from .scattering import (
    QdState,
    Spectrum,
    SystemParams,
    coupling_regime,
    phase,
    polariton_eigenvalues,
    q_factor,
    rabi_splitting,
    reflection_amplitude,
    reflectivity,
    unwrapped_phase,
)
from .tuning import (
    TemperatureScan,
    TuningModel,
    anticrossing_gap,
    crossing_temperature,
    energies_at,
    scan_dip_positions,
    synthesize_scan,
)

__version__ = "0.1.0"
