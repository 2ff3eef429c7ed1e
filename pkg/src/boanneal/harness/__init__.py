"""Experiment harness: configuration, seeded runs, aggregation, CSV export."""

from .config import (
    CONFIG_VERSION,
    BathDef,
    ConfigError,
    ExperimentConfig,
    FomDef,
    FomKind,
    IntegratorDef,
    OptimizerDef,
    OptimizerKind,
    Problem,
    RydbergDef,
    ScheduleDef,
    SystemDef,
    canonical_json,
    config_digest,
    from_dict,
    load_config,
    validate,
)
from .objectives import build_objective, pspin_system, schedule_specs
from .plots import emit_plot_data
from .runner import (
    ARTIFACT_VERSION,
    RunRecord,
    read_records,
    run_experiment,
    run_repetition,
)
from .stats import Aggregate, aggregate, metric_values, running_best_quartiles

__all__ = [
    "ARTIFACT_VERSION",
    "CONFIG_VERSION",
    "Aggregate",
    "BathDef",
    "ConfigError",
    "ExperimentConfig",
    "FomDef",
    "FomKind",
    "IntegratorDef",
    "OptimizerDef",
    "OptimizerKind",
    "Problem",
    "RunRecord",
    "RydbergDef",
    "ScheduleDef",
    "SystemDef",
    "aggregate",
    "build_objective",
    "canonical_json",
    "config_digest",
    "emit_plot_data",
    "from_dict",
    "load_config",
    "metric_values",
    "pspin_system",
    "read_records",
    "run_experiment",
    "run_repetition",
    "running_best_quartiles",
    "schedule_specs",
    "validate",
]
