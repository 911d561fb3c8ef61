"""Scenario runner: stress, rejuvenation and post-rejuvenation phases.

A scenario deploys a cloud, runs a stress phase of back-to-back
workloads while sampling resource gauges, rejuvenates the cloud, and
runs one more observation window after rejuvenation.  The collected
indicator series are binned hourly and fed to the trend tests; the
ageing summary compares the last stress hour against both the baseline
hour and the first post-rejuvenation hour.

If the cloud fails before the scheduled rejuvenation, the configured
policy decides what happens: ``wait-for-schedule`` leaves the cloud
down until the planned rejuvenation time (the dead window is excluded
from analysis), while ``rejuvenate-on-failure`` rejuvenates at the hour
mark where the failure was detected.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from .cloud import (
    OVERLOAD_INDICATOR_ERRORS,
    CloudState,
    EntityKind,
    FaultModel,
    ResourceParams,
    Topology,
    cache_cleanup,
    check_failed,
    rejuvenate,
)
from .errors import ConfigError
from .seeding import scenario_seed, stream
from .trendstats import IndicatorAnalysis, IndicatorSeries, evaluate_indicator
from .workload import (
    STOP_STREAM,
    TimingParams,
    WorkloadDefinition,
    WorkloadStatus,
    run_stream,
)

SECONDS_PER_HOUR = 3600.0


class EarlyFailurePolicy(Enum):
    """What to do when the cloud fails before the scheduled rejuvenation."""

    WAIT = "wait-for-schedule"
    REJUVENATE = "rejuvenate-on-failure"


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to run one scenario deterministically."""

    scenario_id: str
    topology: str = "multi-node"
    concurrency: int = 1
    stress_hours: int = 24
    post_rejuvenation_hours: int = 1
    seed: int = 0
    policy: EarlyFailurePolicy = EarlyFailurePolicy.WAIT
    resources: ResourceParams = field(default_factory=ResourceParams)
    timing: TimingParams = field(default_factory=TimingParams)
    quotas: Mapping[EntityKind, int] | None = None
    faults: Mapping[str, Mapping[str, float]] | None = None
    workload: WorkloadDefinition | None = None
    sample_interval_seconds: float = 30.0
    deploy_failure_probability: float = 0.0

    def __post_init__(self):
        if not self.scenario_id:
            raise ConfigError("scenario_id must be non-empty")
        if self.concurrency < 1:
            raise ConfigError("concurrency must be at least 1")
        if self.stress_hours < 0 or self.post_rejuvenation_hours < 0:
            raise ConfigError("phase lengths cannot be negative")
        if not 0 < self.sample_interval_seconds <= SECONDS_PER_HOUR:
            raise ConfigError("sample interval must lie in (0, 3600] seconds")
        if not 0.0 <= self.deploy_failure_probability <= 1.0:
            raise ConfigError("deploy failure probability must lie in [0, 1]")
        Topology.named(self.topology)

    def to_document(self) -> dict:
        doc: dict = {
            "scenario_id": self.scenario_id,
            "topology": self.topology,
            "concurrency": self.concurrency,
            "stress_hours": self.stress_hours,
            "post_rejuvenation_hours": self.post_rejuvenation_hours,
            "seed": self.seed,
            "policy": self.policy.value,
            "resources": dataclasses.asdict(self.resources),
            "timing": self.timing.to_document(),
            "sample_interval_seconds": self.sample_interval_seconds,
            "deploy_failure_probability": self.deploy_failure_probability,
        }
        doc["resources"]["cache_depositing_steps"] = list(
            self.resources.cache_depositing_steps
        )
        if self.quotas is not None:
            doc["quotas"] = {kind.value: q for kind, q in self.quotas.items()}
        if self.faults is not None:
            doc["faults"] = {s: dict(e) for s, e in self.faults.items()}
        if self.workload is not None:
            doc["workload"] = self.workload.to_document()
        return doc

    @classmethod
    def from_document(cls, doc: Mapping) -> "ScenarioConfig":
        known = {
            "scenario_id",
            "topology",
            "concurrency",
            "stress_hours",
            "post_rejuvenation_hours",
            "seed",
            "policy",
            "resources",
            "timing",
            "quotas",
            "faults",
            "workload",
            "sample_interval_seconds",
            "deploy_failure_probability",
        }
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown scenario fields: {sorted(unknown)}")
        if "scenario_id" not in doc:
            raise ConfigError("scenario document needs a scenario_id")
        try:
            policy = EarlyFailurePolicy(doc.get("policy", "wait-for-schedule"))
        except ValueError:
            raise ConfigError(f"unknown policy {doc.get('policy')!r}") from None
        quotas = None
        if "quotas" in doc:
            quotas = {}
            for name, q in dict(doc["quotas"]).items():
                try:
                    quotas[EntityKind(name)] = int(q)
                except ValueError:
                    raise ConfigError(f"unknown entity kind {name!r}") from None
        workload = None
        if "workload" in doc:
            workload = WorkloadDefinition.from_document(doc["workload"])
        return cls(
            scenario_id=str(doc["scenario_id"]),
            topology=str(doc.get("topology", "multi-node")),
            concurrency=int(doc.get("concurrency", 1)),
            stress_hours=int(doc.get("stress_hours", 24)),
            post_rejuvenation_hours=int(doc.get("post_rejuvenation_hours", 1)),
            seed=int(doc.get("seed", 0)),
            policy=policy,
            resources=_resources_from_document(doc.get("resources", {})),
            timing=TimingParams.from_document(doc.get("timing", {})),
            quotas=quotas,
            faults={s: dict(e) for s, e in dict(doc.get("faults", {})).items()} or None,
            workload=workload,
            sample_interval_seconds=float(doc.get("sample_interval_seconds", 30.0)),
            deploy_failure_probability=float(doc.get("deploy_failure_probability", 0.0)),
        )


def _resources_from_document(doc: Mapping) -> ResourceParams:
    names = {f.name for f in dataclasses.fields(ResourceParams)}
    unknown = set(doc) - names
    if unknown:
        raise ConfigError(f"unknown resource fields: {sorted(unknown)}")
    kwargs = dict(doc)
    if "cache_depositing_steps" in kwargs:
        kwargs["cache_depositing_steps"] = tuple(kwargs["cache_depositing_steps"])
    return ResourceParams(**kwargs)


@dataclass(frozen=True)
class ErrorEvent:
    """One recorded workload error with its ageing and overload nature."""

    time: float
    step: str
    error: str
    ageing: bool
    overload: bool


@dataclass(frozen=True)
class ScenarioReport:
    """Everything a scenario run produced."""

    scenario_id: str
    topology: str
    concurrency: int
    seed: int
    policy: str
    stress_hours: int
    post_rejuvenation_hours: int
    deploy_failed: bool
    failure_point: float | None
    rejuvenation_started: float | None
    rejuvenation_ended: float | None
    excluded_windows: tuple[tuple[float, float], ...]
    series: Mapping[str, IndicatorSeries]
    analyses: Mapping[str, IndicatorAnalysis]
    hourly_counts: tuple[dict, ...]
    totals: Mapping[str, int]
    error_log: tuple[ErrorEvent, ...]
    #: Hourly bins fed to the trend test: stress-phase bins only; the
    #: rejuvenation and post-rejuvenation bins never enter the test.
    trend_input: str = "stress-bins-only"


def _deploy_fails(config: ScenarioConfig) -> bool:
    if config.deploy_failure_probability <= 0.0:
        return False
    rng = stream(config.seed, "deploy")
    return bool(rng.random() < config.deploy_failure_probability)


def _bump_duplicates(samples: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Strictly order sample timestamps, nudging ties by a nanosecond."""
    samples = sorted(samples)
    out: list[tuple[float, float]] = []
    previous = None
    for ts, value in samples:
        if previous is not None and ts <= previous:
            ts = previous + 1e-9
        out.append((ts, value))
        previous = ts
    return out


def run_scenario(config: ScenarioConfig) -> ScenarioReport:
    """Run one scenario and analyse every collected indicator."""
    if _deploy_fails(config):
        return ScenarioReport(
            scenario_id=config.scenario_id,
            topology=config.topology,
            concurrency=config.concurrency,
            seed=config.seed,
            policy=config.policy.value,
            stress_hours=config.stress_hours,
            post_rejuvenation_hours=config.post_rejuvenation_hours,
            deploy_failed=True,
            failure_point=None,
            rejuvenation_started=None,
            rejuvenation_ended=None,
            excluded_windows=(),
            series={},
            analyses={},
            hourly_counts=(),
            totals={status.value: 0 for status in WorkloadStatus},
            error_log=(),
        )

    topology = Topology.named(config.topology)
    cloud = CloudState(
        topology=topology,
        params=config.resources,
        quotas=config.quotas,
        seed=config.seed,
    )
    defn = config.workload or WorkloadDefinition.default()
    faults = FaultModel(
        config.faults,
        seed=config.seed,
        known_steps=[s.name for s in defn.steps],
    )

    durations: list[tuple[float, float]] = []
    gauge_samples: dict[str, list[tuple[float, float]]] = {
        "memory-available": [],
        "swap-used": [],
    }
    disk_names = {node: f"disk-used-{node}" for node in topology.compute_nodes}
    for name in disk_names.values():
        gauge_samples[name] = []
    hourly: dict[int, dict[str, int]] = {}
    totals = {status.value: 0 for status in WorkloadStatus}
    error_log: list[ErrorEvent] = []

    def tick_hook(t: float, gauges: dict) -> None:
        control = gauges[topology.control_node]
        gauge_samples["memory-available"].append((t, control["memory_available"]))
        gauge_samples["swap-used"].append((t, control["swap_used"]))
        for node, name in disk_names.items():
            gauge_samples[name].append((t, gauges[node]["disk_used"]))

    def hour_hook(t: float):
        cache_cleanup(cloud)
        check_failed(cloud)
        if cloud.failed:
            return STOP_STREAM
        return None

    def result_hook(result) -> None:
        hour = int(result.started_at // SECONDS_PER_HOUR)
        bucket = hourly.setdefault(
            hour, {status.value: 0 for status in WorkloadStatus}
        )
        bucket[result.status.value] += 1
        totals[result.status.value] += 1
        if result.status is WorkloadStatus.SUCCESS:
            durations.append((result.started_at, result.duration))

    def error_hook(t: float, step: str, error: str, stranded: bool) -> None:
        error_log.append(
            ErrorEvent(
                time=t,
                step=step,
                error=error,
                ageing=stranded,
                overload=error in OVERLOAD_INDICATOR_ERRORS,
            )
        )

    hooks = dict(
        faults=faults,
        timing=config.timing,
        tick_seconds=config.sample_interval_seconds,
        tick_hook=tick_hook,
        hour_hook=hour_hook,
        error_hook=error_hook,
        result_hook=result_hook,
        collect=False,
    )

    # Stress phase.
    stress_end = config.stress_hours * SECONDS_PER_HOUR
    excluded: list[tuple[float, float]] = []
    if config.stress_hours > 0:
        run_stream(
            defn,
            cloud,
            until=stress_end,
            concurrency=config.concurrency,
            **hooks,
        )
    if cloud.failed and cloud.clock < stress_end:
        if config.policy is EarlyFailurePolicy.WAIT:
            excluded.append((cloud.clock, stress_end))
            cloud.clock = stress_end
        # Under rejuvenate-on-failure the clock stays at the detection
        # hour and rejuvenation begins right away.
    rejuvenation_started = cloud.clock

    # Rejuvenation: redeploy, then record one clean sample near the end
    # of the rejuvenation window for every gauge.
    rejuvenate(cloud)
    rejuvenation_ended = cloud.clock
    sample_ts = max(
        rejuvenation_started, rejuvenation_ended - config.sample_interval_seconds
    )
    gauges = cloud.read_gauges()
    control = gauges[topology.control_node]
    gauge_samples["memory-available"].append((sample_ts, control["memory_available"]))
    gauge_samples["swap-used"].append((sample_ts, control["swap_used"]))
    for node, name in disk_names.items():
        gauge_samples[name].append((sample_ts, gauges[node]["disk_used"]))

    # Post-rejuvenation phase.
    post_end = rejuvenation_ended + config.post_rejuvenation_hours * SECONDS_PER_HOUR
    if config.post_rejuvenation_hours > 0:
        run_stream(
            defn,
            cloud,
            until=post_end,
            concurrency=config.concurrency,
            **hooks,
        )

    series: dict[str, IndicatorSeries] = {}
    ordered_durations = _bump_duplicates(durations)
    if ordered_durations:
        series["workload-duration"] = IndicatorSeries(
            name="workload-duration", unit="seconds", samples=tuple(ordered_durations)
        )
    for name, samples in gauge_samples.items():
        if samples:
            series[name] = IndicatorSeries(
                name=name, unit="GB", samples=tuple(_bump_duplicates(samples))
            )

    boundaries = (rejuvenation_started, rejuvenation_ended)
    analyses = {
        name: evaluate_indicator(
            s, phase_boundaries=boundaries, exclude_windows=tuple(excluded)
        )
        for name, s in series.items()
    }

    counts = tuple(
        {"hour": hour, **hourly[hour]} for hour in sorted(hourly)
    )
    return ScenarioReport(
        scenario_id=config.scenario_id,
        topology=config.topology,
        concurrency=config.concurrency,
        seed=config.seed,
        policy=config.policy.value,
        stress_hours=config.stress_hours,
        post_rejuvenation_hours=config.post_rejuvenation_hours,
        deploy_failed=False,
        failure_point=cloud.failed_at,
        rejuvenation_started=rejuvenation_started,
        rejuvenation_ended=rejuvenation_ended,
        excluded_windows=tuple(excluded),
        series=series,
        analyses=analyses,
        hourly_counts=counts,
        totals=totals,
        error_log=tuple(error_log),
    )


@dataclass(frozen=True)
class SuiteResult:
    """Reports per scenario, plus error strings for scenarios that threw."""

    reports: tuple[ScenarioReport, ...]
    errors: Mapping[str, str]


def run_suite(configs: list[ScenarioConfig]) -> SuiteResult:
    """Run scenarios in order, isolating failures per scenario."""
    ids = [c.scenario_id for c in configs]
    if len(set(ids)) != len(ids):
        raise ConfigError("scenario ids must be unique")
    reports = []
    errors: dict[str, str] = {}
    for config in configs:
        try:
            reports.append(run_scenario(config))
        except Exception as exc:  # noqa: BLE001 - isolate scenario crashes
            errors[config.scenario_id] = f"{type(exc).__name__}: {exc}"
    return SuiteResult(reports=tuple(reports), errors=errors)


#: Concurrency sweep used by the default scenario matrix.
MATRIX_CONCURRENCIES = (1, 2, 4, 8, 16, 64)


def default_matrix(base_seed: int = 0) -> list[ScenarioConfig]:
    """The standard 12-scenario matrix.

    Scenarios 1-6 run the multi-node topology and 7-12 the all-in-one
    topology, each sweeping concurrency 1, 2, 4, 8, 16 and 64 over a
    24-hour stress phase plus rejuvenation and one post-rejuvenation
    hour.  Every scenario derives its own independent seed.
    """
    configs = []
    for offset, topology in ((0, "multi-node"), (6, "all-in-one")):
        for i, concurrency in enumerate(MATRIX_CONCURRENCIES, start=1):
            scenario_id = str(offset + i)
            configs.append(
                ScenarioConfig(
                    scenario_id=scenario_id,
                    topology=topology,
                    concurrency=concurrency,
                    seed=scenario_seed(base_seed, offset + i),
                )
            )
    return configs
