"""rdscount: network-sample simulation and hidden-population estimation.

Simulates attributed social networks from an exponential-family random
graph model, runs respondent-driven sampling on them, computes degree-
weighted proportion/total estimators with tree-bootstrap and delta-method
confidence intervals, sweeps sample sizes for power analysis, and fits the
drift+covariate forecasting model used for year-over-year comparisons.
"""

__version__ = "0.1.0"

from .bootstrap import BootstrapPlan, bootstrap_ci, resample_iid, resample_tree
from .ergm import (
    ErgmModel,
    ErgmTerm,
    SimulationControl,
    change_stats,
    default_control,
    fit_moment_matching,
    log_odds_of_toggle,
    simulate,
    simulate_many,
    sufficient_stats,
)
from .errors import EstimatorUndefinedError, InputError
from .estimators import (
    EstimateWithCi,
    GroupSummary,
    delta_ci_total,
    demographic_breakdown,
    hajek_mean,
    sh_proportion,
    total_from_known,
)
from .graph import AttributedNetwork, NodeAttributeSchema
from .power import PowerCurvePoint, PowerSweepConfig, run_power_sweep, seed_sensitivity
from .rds import (
    RdsDesign,
    RdsRespondent,
    RdsSample,
    cross_recruit_counts,
    drop_early_waves,
    read_rds_csv,
    simulate_rds,
    write_rds_csv,
)
from .timeseries import ArimaFit, PitSeries, fit_arima010_with_covariate, forecast

__all__ = [name for name in dir() if not name.startswith("_")]
