"""wignerlab: a phase-space laboratory for Wigner-function dynamics.

Evolves Wigner distributions under full quantum (Moyal bracket), classical
(Poisson bracket / Liouville), and open-system (momentum diffusion plus
optional friction) dynamics on a shared spectral grid, with diagnostics and
closed-form estimators for the timescales that govern the quantum-classical
correspondence of chaotic systems.
"""

from .diagnostics import (
    BreakdownResult,
    TrajectoryRecord,
    breakdown_time,
    contracting_width,
    divergence,
    entropy_rate_fit,
    fringe_contrast,
    linear_entropy,
    negativity_volume,
    purity,
    stable_direction,
)
from .errors import (
    AlreadyQuantumError,
    ConfigError,
    DomainTooSmallError,
    NumericsError,
    ResolutionError,
    UnphysicalStateError,
    UnsupportedModelError,
    WignerLabError,
)
from .estimators import (
    GaussianState,
    LyapunovEstimate,
    MacroScenario,
    classical_lyapunov,
    coherence_length,
    decoherence_time,
    entropy_rate_profile,
    gaussian_oracle,
    hyperion_report,
    sigma_c,
    t_eq,
    t_hbar_chaotic,
    t_hbar_integrable,
    t_r,
)
from .fields import (
    WignerField,
    field_norm,
    from_xs,
    l2_distance,
    marginals,
    moments,
    to_xs,
)
from .grid import PhaseSpaceGrid, make_grid
from .potentials import (
    DoubleWell,
    DrivenDoubleWell,
    Free,
    Harmonic,
    Inverted,
    evaluate,
    nonlinearity_scale,
)
from .propagators import (
    EnvironmentModel,
    EvolutionSpec,
    ObserverSpec,
    evolve,
    first_correction_ratio,
    step_decoherence,
    step_friction,
    step_kinetic,
    step_potential,
)
from .snapshots import load_snapshot, save_snapshot, write_pgm
from .states import CatSpec, GaussianSpec, make_state

__version__ = "0.1.0"
