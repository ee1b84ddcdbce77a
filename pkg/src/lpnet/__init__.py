"""Laplace-domain forecaster for forced and delayed dynamical systems."""

from lpnet.laplace import (
    IltConfig,
    LaplaceSignal,
    QuerySet,
    build_queries,
    dlt,
    dlt_signal,
    fflt,
    ilt_fourier,
    ilt_fourier_prescaled,
    prescale,
    scale_factor,
)
from lpnet.model import (
    LpNetParams,
    analytic_second_order_forecast,
    forecast,
    forecast_window,
    init_lpnet,
    load_model,
    save_model,
)
from lpnet.systems import SystemSpec, TimeSeriesSample, build_dataset, load_dataset, save_dataset
from lpnet.training import (
    Metrics,
    RunConfig,
    evaluate,
    multi_seed_summary,
    run_config,
    train_run,
)

__all__ = [
    "IltConfig",
    "LaplaceSignal",
    "LpNetParams",
    "Metrics",
    "QuerySet",
    "RunConfig",
    "SystemSpec",
    "TimeSeriesSample",
    "analytic_second_order_forecast",
    "build_dataset",
    "build_queries",
    "dlt",
    "dlt_signal",
    "evaluate",
    "fflt",
    "forecast",
    "forecast_window",
    "ilt_fourier",
    "ilt_fourier_prescaled",
    "init_lpnet",
    "load_dataset",
    "load_model",
    "multi_seed_summary",
    "prescale",
    "run_config",
    "save_dataset",
    "save_model",
    "scale_factor",
    "train_run",
]
