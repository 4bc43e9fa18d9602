"""Monte Carlo for large deviations of heavy-tailed random walks."""

from .estimators import (
    BudgetExceededError,
    EstimateRecord,
    LowCountWarning,
    big_jump_main_term,
    crude_mc,
)
from .experiment import (
    RESULT_COLUMNS,
    Experiment,
    ExperimentError,
    ScanResult,
    TrendVerdict,
    psi_consistency_report,
    ratio_scan,
    tail_function,
    trend_toward_one,
    write_manifest,
    write_plot_csv,
    write_results_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
