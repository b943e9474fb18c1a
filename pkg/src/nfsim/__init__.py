"""Time-domain simulator of resonant x-ray forward scattering through
magnetized 57Fe targets, including polarization which-way marking and its
erasure in two-target and interferometer setups."""

from .analysis import fringe_shift, visibility
from .constants import HBAR_EV_S, IRON57, MU_N_EV_PER_T, IsotopeConstants
from .errors import AnalysisError, ConfigError, GridError, NfsimError
from .experiments import (
    EquivalenceReport,
    Scheme1Config,
    Scheme2Config,
    SpectrumResult,
    alpha_beta_of_delay,
    default_storage_events,
    run_scheme1,
    run_scheme2,
    run_single_target,
    storage_delay_equivalence,
)
from .kernel import (
    PropagationResult,
    SwitchSchedule,
    TargetConfig,
    bessel_j1,
    current_factor,
    dynamical_beat_first_null,
    excitation_factor,
    first_order_line_terms,
    propagate,
    propagate_delta,
    single_line_oracle,
)
from .nuclear import (
    HyperfineConfig,
    TransitionLine,
    matching_field,
    matching_ratio,
    sextet_index,
    transition_table,
    zeeman_splitting,
)
from .polarization import (
    E_MINUS,
    E_PI,
    E_PLUS,
    E_SIGMA,
    DeltaImpulse,
    FieldEnvelope,
    PolVector,
    TimeGrid,
    beam_splitter,
    default_grid,
    intensity,
    linear_pol,
    mirror,
    project,
    time_delay,
    time_gate,
)

__version__ = "0.1.0"
