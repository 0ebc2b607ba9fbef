"""vaetsim: vibrationally assisted energy transfer in a PT-symmetric
chromophore dimer.

Dense-matrix simulator for a gain-loss donor/acceptor dimer coupled to a
thermal vibrational mode: closed-form and numerical spectra, exceptional
point location and classification, normalized nonunitary and Lindblad
dynamics, and the parameter sweeps that map the fluorescence-detected
vibrational spectra.
"""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    BasisLabel,
    DimerParams,
    DissipationParams,
    VibrationParams,
    dimer_hamiltonian,
    donor_hamiltonian,
    effective_single_excitation_hamiltonian,
    full_hamiltonian,
    passive_pt_offset,
    uphill_condition,
)
from .spectral import (  # noqa: F401
    EPReport,
    SortedDimerSpectrum,
    classify_delta_zero,
    dimer_spectrum_closed_form,
    donor_eigensystem,
    eigvec_coalescence,
    find_ep,
    slow_period,
    trace_exceptional_line,
    transition_matrix_elements,
)
from .dynamics import (  # noqa: F401
    DensityMatrix,
    TrajectoryResult,
    acceptor_excited_population,
    acceptor_population,
    averaged_population,
    evolve_lindblad,
    evolve_nonunitary,
    evolve_params,
    initial_state,
    thermal_vibration_state,
    time_grid,
)
from .sweeps import (  # noqa: F401
    Axis,
    EnhancementCurve,
    SpectrumMap,
    cut_1d,
    enhancement_factor,
    period_curve,
    sweep_2d,
)
