"""Spectral-Galerkin laboratory for slow decay in damped semilinear evolutions.

Simulates u'' + u' + Au + grad F(u) = 0 in a truncated eigenbasis of A,
tracks the Lyapunov and quotient functionals that control the decay rate,
certifies membership in the explicit open set of slow initial data, and
estimates decay exponents from the sampled trajectories.
"""

from .analysis import (
    Classification,
    DecayVerdict,
    FitError,
    OracleSeries,
    SlopeFit,
    classify,
    fit_slope,
    fit_slope_xy,
    ode_oracle,
    verify_range_decay,
    verify_upper,
)
from .config import PRESETS, ConfigError, RunConfig, parse_config, parse_datum, resolve
from .energies import (
    CSV_COLUMNS,
    EnergySample,
    EpsilonSelection,
    check_basic_bound,
    energy_series,
    max_delta,
    sample_energies,
    select_epsilon,
)
from .integrator import (
    IntegrationDivergedError,
    IntegratorConfig,
    Sampling,
    Scheme,
    Trajectory,
    linear_half_step,
    run,
    sample_times,
    step,
)
from .slowset import (
    SlowCertificate,
    check_certified_run,
    compute_certificate,
    estimate_R,
    lower_envelope,
)
from .spectral import (
    Basis,
    BasisKind,
    Nonlinearity,
    NonlinearityKind,
    Problem,
    State,
    StateNorms,
    apply_A,
    build_basis,
    grad_F,
    graph_norm,
    local_power,
    make_problem,
    norm_power,
    norms,
    potential_F,
    rank_one,
)

__version__ = "0.1.0"
