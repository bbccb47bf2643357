"""Photon-mediated qubit interactions in 1D photonic media.

Exact single-excitation dynamics, Markovian parameters with Lamb-shift
self-consistency, and single-photon scattering for qubits coupled to
waveguides, photonic crystals and exponential-cutoff continua.
"""

from .models import (
    CONSTANT_SPECTRUM,
    EXPONENTIAL_CONTINUUM,
    GAPLESS_CHAIN,
    MODEL_KINDS,
    PHOTONIC_CRYSTAL,
    TIGHT_BINDING,
    ModeSet,
    PhotonicModel,
    QubitArray,
    build_modes,
    group_velocity,
    spectral_density,
)
from .kernels import (
    KernelSpec,
    channel_weight,
    kernel,
    kernel_antiderivative,
    kernel_pair,
    kernel_pm,
    phase_weighted_antiderivative,
    tight_binding_self_energy,
)
from .markov import (
    MarkovParameters,
    lamb_shift_self_consistent,
    lamb_shift_simplified,
    markov_integral,
    principal_value,
    resonant_dipole_params,
    single_qubit_closed_form,
    two_qubit_closed_form,
    two_qubit_params,
)
from .dynamics import (
    ExcitationState,
    TimeTrace,
    evolve_ide,
    evolve_modes,
    initial_qubit_excited,
)
from .analysis import (
    FitResult,
    detect_light_cone,
    extract_gap_from_period,
    extract_two_qubit,
    fit_decay,
)
from .scattering import (
    EffectiveHamiltonian,
    ScatteringResult,
    effective_hamiltonian,
    resonances,
    scattering_amplitudes,
    self_energy_matrix,
)

__version__ = "0.1.0"
