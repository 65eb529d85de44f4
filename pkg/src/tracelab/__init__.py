"""tracelab: a numerical laboratory for Schrodinger spectra, trace
inequalities with their sharp constants, the tied Gagliardo-Nirenberg
variational problems, and occupation-number free energies."""

__version__ = "0.1.0"

from ._backend import backend_name
from .constants import (
    KappaPair,
    SemiclassicalParams,
    gamma_ln,
    interp_constant,
    kappa_dual,
    kappa_standard,
    semiclassical_c_lt,
    sharp_constant,
)
from .potentials import Potential, gt_rhs, load_sampled
from .spectra import (
    Spectrum,
    TailModel,
    box_spectrum,
    dirichlet_eigensystem,
    dirichlet_solve,
    harmonic_spectrum,
    heat_trace,
    radial_solve,
)
from .riesz import (
    SolverConfig,
    WeightPair,
    harmonic_q,
    riesz_mean,
    verify_trace_inequality,
    weight_pair,
    weyl_sweep,
)
from .groundstate import (
    GroundState,
    gn_constant_dual,
    gn_constant_standard,
    one_bound_state_constant,
    optimal_potential,
    shoot_ground_state,
    soliton_1d,
)
from .mixedstate import (
    MixedState,
    OccupationLaw,
    boltzmann_law,
    ck_lower_bound,
    cn_estimate,
    custom_law,
    evolve_check,
    fermi_law,
    free_energy,
    free_energy_gap,
    minimizer_state,
    occupation_from_spectrum,
    orthogonal_energy_check,
    power_law_occupation,
)
from .interpolation import (
    LegendrePair,
    H_from_G,
    beta_from_F,
    legendre_pair,
    log_sobolev_constant_check,
    log_sobolev_scaled_check,
    random_corpus_states,
    scaled_form_check,
    system_interp_check,
)

__all__ = [name for name in dir() if not name.startswith("_")]
