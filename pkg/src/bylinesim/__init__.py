"""Deterministic Monte Carlo simulator of byline-position ultimatum dynamics
in collaborative manuscript projects."""

__version__ = "0.1.0"

from .engine import (
    ProjectConfig,
    ReplicationStats,
    SeedPolicy,
    SimulationOutcome,
    SimulationState,
    UltimatumEvent,
    init_project,
    is_complete,
    run_replications,
    run_simulation,
    sample_contribution,
    step_round,
    stream,
)
from .model import (
    AuthorParams,
    AuthorState,
    Decision,
    DiscountParams,
    PositionUtilityParams,
    UltimatumProposal,
    apply_ultimatum,
    best_ultimatum,
    discounted_completion_utility,
    displacement,
    issuance_worthwhile,
    issuer_gain,
    position_utility,
    responder_accepts,
    withdraw_or_hold,
)
from .scenarios import (
    CASE_IDS,
    CaseSampler,
    ExperimentGrid,
    SpectrumSpec,
    SweepKind,
    TableDefaults,
    case_config,
    default_config,
    fig1_grid,
    fig2_sweep,
    sample_spectrum_values,
)
from .stats import (
    RegressionResult,
    TTestResult,
    iau_rate,
    log_fit,
    mean_std,
    ols_fit_planar,
    paired_t_test,
    per_position_rates,
    r_squared,
)

__all__ = [
    "__version__",
    "AuthorParams",
    "AuthorState",
    "CASE_IDS",
    "CaseSampler",
    "Decision",
    "DiscountParams",
    "ExperimentGrid",
    "PositionUtilityParams",
    "ProjectConfig",
    "RegressionResult",
    "ReplicationStats",
    "SeedPolicy",
    "SimulationOutcome",
    "SimulationState",
    "SpectrumSpec",
    "SweepKind",
    "TTestResult",
    "TableDefaults",
    "UltimatumEvent",
    "UltimatumProposal",
    "apply_ultimatum",
    "best_ultimatum",
    "case_config",
    "default_config",
    "discounted_completion_utility",
    "displacement",
    "fig1_grid",
    "fig2_sweep",
    "iau_rate",
    "init_project",
    "is_complete",
    "issuance_worthwhile",
    "issuer_gain",
    "log_fit",
    "mean_std",
    "ols_fit_planar",
    "paired_t_test",
    "per_position_rates",
    "position_utility",
    "r_squared",
    "responder_accepts",
    "run_replications",
    "run_simulation",
    "sample_contribution",
    "sample_spectrum_values",
    "step_round",
    "stream",
    "withdraw_or_hold",
]
