"""Deterministic software-ageing simulation and trend detection.

The package splits into a statistics layer (Mann-Kendall trend tests,
Sen's slope, hourly binning, ageing/rejuvenation deltas), a simulated
quota-limited cloud with leak and fault injection, a workload engine
that drives it, scenario orchestration, and reporting/ingest glue.
"""

from .errors import (
    AgesimError,
    ConfigError,
    DuplicateTimestampError,
    EmptyFileError,
    EmptySeriesError,
    InsufficientDataError,
    LedgerUnderflowError,
    MissingPhaseBinError,
    ParseError,
)
from .seeding import STREAM_IDS, scenario_seed, stream
from .trendstats import (
    AgeingSummary,
    HourlySeries,
    IndicatorAnalysis,
    IndicatorSeries,
    PhaseMarks,
    TrendTestResult,
    TrendVerdict,
    ageing_summary,
    bin_hourly,
    classify_z,
    evaluate_indicator,
    mann_kendall,
    rebased,
    sens_slope,
)
from .cloud import (
    DEFAULT_ERROR_CATALOG,
    DEFAULT_QUOTAS,
    OVERLOAD_INDICATOR_ERRORS,
    AgeingRule,
    CloudState,
    Created,
    EntityKind,
    ErrorSpec,
    FaultModel,
    IntervalElapsed,
    QuotaExceeded,
    ResourceParams,
    Topology,
    WorkloadStepCompleted,
    apply_resource_effects,
    cache_cleanup,
    capacity,
    check_failed,
    quota_error_name,
    rejuvenate,
    try_create,
    try_delete,
)
from .workload import (
    CLOUD_UNAVAILABLE,
    DEFAULT_STEPS,
    STOP_STREAM,
    StepAction,
    StepSpec,
    TimingParams,
    WorkloadDefinition,
    WorkloadResult,
    WorkloadStatus,
    run_stream,
    run_workload,
    service_time,
)
from .scenario import (
    MATRIX_CONCURRENCIES,
    EarlyFailurePolicy,
    ErrorEvent,
    ScenarioConfig,
    ScenarioReport,
    SuiteResult,
    default_matrix,
    run_scenario,
    run_suite,
)
from .ingest import (
    WorkloadReportData,
    ingest,
    ingest_workload_report,
    serialize_series,
    write_series_csv,
)
from .report import (
    analysis_document,
    error_distribution,
    render_tables,
    report_document,
    suite_trend_table,
    verdict_marker,
    write_bundle,
    write_suite_bundle,
)

__version__ = "0.1.0"

__all__ = [
    "AgesimError",
    "ConfigError",
    "DuplicateTimestampError",
    "EmptyFileError",
    "EmptySeriesError",
    "InsufficientDataError",
    "LedgerUnderflowError",
    "MissingPhaseBinError",
    "ParseError",
    "STREAM_IDS",
    "scenario_seed",
    "stream",
    "AgeingSummary",
    "HourlySeries",
    "IndicatorAnalysis",
    "IndicatorSeries",
    "PhaseMarks",
    "TrendTestResult",
    "TrendVerdict",
    "ageing_summary",
    "bin_hourly",
    "classify_z",
    "evaluate_indicator",
    "mann_kendall",
    "rebased",
    "sens_slope",
    "DEFAULT_ERROR_CATALOG",
    "DEFAULT_QUOTAS",
    "OVERLOAD_INDICATOR_ERRORS",
    "AgeingRule",
    "CloudState",
    "Created",
    "EntityKind",
    "ErrorSpec",
    "FaultModel",
    "IntervalElapsed",
    "QuotaExceeded",
    "ResourceParams",
    "Topology",
    "WorkloadStepCompleted",
    "apply_resource_effects",
    "cache_cleanup",
    "capacity",
    "check_failed",
    "quota_error_name",
    "rejuvenate",
    "try_create",
    "try_delete",
    "CLOUD_UNAVAILABLE",
    "DEFAULT_STEPS",
    "STOP_STREAM",
    "StepAction",
    "StepSpec",
    "TimingParams",
    "WorkloadDefinition",
    "WorkloadResult",
    "WorkloadStatus",
    "run_stream",
    "run_workload",
    "service_time",
    "MATRIX_CONCURRENCIES",
    "EarlyFailurePolicy",
    "ErrorEvent",
    "ScenarioConfig",
    "ScenarioReport",
    "SuiteResult",
    "default_matrix",
    "run_scenario",
    "run_suite",
    "WorkloadReportData",
    "ingest",
    "ingest_workload_report",
    "serialize_series",
    "write_series_csv",
    "analysis_document",
    "error_distribution",
    "render_tables",
    "report_document",
    "suite_trend_table",
    "verdict_marker",
    "write_bundle",
    "write_suite_bundle",
]
