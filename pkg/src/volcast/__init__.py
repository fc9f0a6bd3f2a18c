"""Realized-volatility measurement, HAR-family forecasting with
cross-sectional shrinkage, and equal-predictive-ability testing."""

__version__ = "0.1.0"

from .epa_tests import (
    DecisionResult,
    EpaResult,
    cw_test,
    dm_test,
    gw_decision_rule,
    gw_test,
    hac_lrv,
)
from .forecast_engine import (
    ForecastRun,
    PipelineSpec,
    SchemeConfig,
    mspe,
    read_forecast_run,
    run_firms,
    run_scheme,
    write_forecast_run,
)
from .har_features import (
    DesignMatrix,
    ModelSpec,
    build_design,
    destandardize,
    standardize,
)
from .panel_data import (
    IntradayPanel,
    RealizedPanel,
    build_realized_panel,
    load_daily_rv,
    load_intraday,
    load_measures_panel,
    summarize,
    write_daily_rv,
    write_intraday,
    write_measures_panel,
)
from .realized_measures import (
    MU1,
    compute_bpv,
    compute_jump,
    compute_rq,
    compute_rv,
    temporal_average,
)
from .shrinkage import (
    CvResult,
    PenaltyFit,
    PenaltySpec,
    adaptive_weights,
    cross_validate,
    fit_cv,
    fit_ols,
    fit_penalized,
    kkt_violation,
    lambda_grid,
    objective_value,
    pilot_weights,
    soft_threshold,
)
from .simulate import (
    DgpConfig,
    simulate_har_panel,
    simulate_paths,
    size_power_experiment,
)

__all__ = [name for name in dir() if not name.startswith("_")]
