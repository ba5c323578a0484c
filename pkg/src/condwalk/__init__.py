"""Planar simple random walk conditioned to avoid the origin.

The conditioning is the Doob transform by the potential kernel a(x): the
conditioned chain steps from x to a neighbor y with probability
a(y) / (4 a(x)).  The package computes a exactly on a disk, exposes the
closed-form hitting, return, and Green's-function formulas that follow,
samples both walks reproducibly, and ships the statistical experiments
that check the asymptotic theorems at desk scale.
"""

from .errors import (
    CondWalkError,
    ConfigError,
    ConstructionError,
    DomainError,
    OracleError,
)
from .experiments import (
    EncounterWindows,
    ExperimentReport,
    GateResult,
    MinimumScales,
    exp_confinement_tail,
    exp_encounters,
    exp_lclt,
    exp_minimum,
    exp_srw_recurrence,
)
from .montecarlo import (
    ComparisonReport,
    Estimate,
    EstimatorConfig,
    STANDARD_CASES,
    estimate_annulus_escape,
    estimate_escape_prob,
    estimate_event,
    estimate_green,
    estimate_hit_prob,
    estimate_return_prob,
    estimate_srw_exit,
    merge,
    standard_suite,
    write_reports_csv,
)
from .potential import (
    KAPPA,
    PotentialTable,
    build_table,
    default_table,
    potential,
    potential_oracle,
    potential_radius,
)
from .rng import Stream, stream_state
from .theory import (
    BracketedValue,
    annulus_escape_prob,
    boundary_disk_hit_bound,
    boundary_hit_bound,
    escape_prob,
    green,
    hit_prob,
    lclt_prediction,
    return_prob,
    srw_exit_before_hit,
)
from .walk import (
    EnterDisk,
    ExitDisk,
    HitPoint,
    StopTimes,
    Trajectory,
    WalkKind,
    future_minimum_profile,
    last_exit_time,
    run_until,
    sample_path,
    step_distribution,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "CondWalkError", "ConfigError", "ConstructionError", "DomainError",
    "OracleError",
    # potential kernel
    "KAPPA", "PotentialTable", "build_table", "default_table", "potential",
    "potential_oracle", "potential_radius",
    # rng
    "Stream", "stream_state",
    # walks
    "WalkKind", "Trajectory", "StopTimes", "HitPoint", "ExitDisk",
    "EnterDisk", "step_distribution", "sample_path", "run_until",
    "future_minimum_profile", "last_exit_time",
    # closed forms
    "BracketedValue", "return_prob", "hit_prob", "green", "escape_prob",
    "annulus_escape_prob", "srw_exit_before_hit", "lclt_prediction",
    "boundary_hit_bound", "boundary_disk_hit_bound",
    # monte carlo
    "EstimatorConfig", "Estimate", "ComparisonReport", "merge",
    "estimate_event", "estimate_return_prob", "estimate_hit_prob",
    "estimate_green", "estimate_escape_prob", "estimate_annulus_escape",
    "estimate_srw_exit", "standard_suite", "STANDARD_CASES",
    "write_reports_csv",
    # experiments
    "MinimumScales", "EncounterWindows", "GateResult", "ExperimentReport",
    "exp_minimum", "exp_lclt", "exp_encounters", "exp_srw_recurrence",
    "exp_confinement_tail",
]
