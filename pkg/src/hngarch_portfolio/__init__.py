"""Closed-form dynamic portfolio choice for a CRRA investor under Heston-Nandi GARCH(1,1)."""

__version__ = "0.1.0"

from .errors import (
    HNGarchError,
    InadmissibleCoefficient,
    InvalidDelta,
    MgfDivergent,
    MismatchedHorizon,
    NegativeCoefficient,
    NonStationary,
    ValidationError,
)
from .model import (
    CHRISTOFFERSEN,
    GarchParams,
    expected_variance,
    long_run_variance,
    next_variance,
    validate,
    variance_log_price_covariance,
)
from .recursion import (
    CoefficientTable,
    ConjecturedOptimalityWarning,
    Preferences,
    StrategySchedule,
    WelReport,
    as_schedule,
    check_monotone_E,
    decompose,
    evaluate_suboptimal,
    expected_utility,
    solve_optimal,
    value_at,
    wealth_equivalent_loss,
)
from .mgf import (
    Cumulants,
    MgfCoefficients,
    cumulants_from_mgf,
    expected_log_wealth,
    log_mgf,
    mgf_coefficients,
    mgf_value,
)
from .simulate import (
    PathSet,
    ReturnAccumulator,
    ReturnStats,
    SimConfig,
    iter_paths,
    maintenance_cashflows,
    return_statistics,
    simulate_paths,
    terminal_wealth_gap,
)
from .limits import (
    DeltaScaling,
    convergence_sweep,
    heston_schedule,
    limit_moment_check,
    merton_schedule,
    merton_weight,
    scale_params,
)
from .stats import RunningMoments
