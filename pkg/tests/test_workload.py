"""Tests for the workload engine: definitions, fault paths, streaming."""

import pytest

from agesim.cloud import CloudState, EntityKind, FaultModel, ResourceParams, check_failed
from agesim.errors import ConfigError
from agesim.workload import (
    CLOUD_UNAVAILABLE,
    DEFAULT_STEP_NAMES,
    LAUNCH_STEP,
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


def quiet_cloud(**param_overrides) -> CloudState:
    params = ResourceParams(
        warmup_noise_gb=0.0, warmup_alloc_gb=0.0, ageing_rate=0.0, **param_overrides
    )
    return CloudState(params=params)


DEFN = WorkloadDefinition.default()

#: Sum of base step times for a clean solo run: 27 steps at 2 s plus the
#: boot (10 s) and volume-create (5 s) overrides.
CLEAN_BASE_SECONDS = 27 * 2.0 + 10.0 + 5.0


# ── Definition structure ─────────────────────────────────────────────────


class TestDefinition:
    def test_has_29_steps(self):
        assert len(DEFN.steps) == 29
        assert len(DEFAULT_STEP_NAMES) == 29

    def test_eleven_creates_each_with_delete(self):
        creates = [s for s in DEFN.steps if s.action is StepAction.CREATE]
        deletes = [s for s in DEFN.steps if s.action is StepAction.DELETE]
        assert len(creates) == 11
        assert len(deletes) == 11
        assert {s.creates for s in creates} == set(EntityKind)
        assert {d.undo_of for d in deletes} == {c.name for c in creates}

    def test_cleanup_is_lifo(self):
        """Undo steps reverse their targets in strictly decreasing order."""
        index = {s.name: i for i, s in enumerate(DEFN.steps)}
        targets = [index[s.undo_of] for s in DEFN.steps if s.undo_of is not None]
        assert all(a > b for a, b in zip(targets, targets[1:]))

    def test_dependencies_precede_dependents(self):
        index = {s.name: i for i, s in enumerate(DEFN.steps)}
        for step in DEFN.steps:
            for dep in step.depends_on:
                assert index[dep] < index[step.name]

    def test_document_round_trip(self):
        assert WorkloadDefinition.from_document(DEFN.to_document()) == DEFN

    def test_out_of_order_cleanup_rejected(self):
        steps = (
            StepSpec("create network", "network", StepAction.CREATE, creates=EntityKind.NETWORK),
            StepSpec("create volume", "volume", StepAction.CREATE, creates=EntityKind.VOLUME),
            StepSpec(
                "delete network",
                "network",
                StepAction.DELETE,
                deletes=EntityKind.NETWORK,
                undo_of="create network",
            ),
            StepSpec(
                "delete volume",
                "volume",
                StepAction.DELETE,
                deletes=EntityKind.VOLUME,
                undo_of="create volume",
            ),
        )
        with pytest.raises(ConfigError):
            WorkloadDefinition(steps=steps)

    def test_unbalanced_create_rejected(self):
        steps = (
            StepSpec("create network", "network", StepAction.CREATE, creates=EntityKind.NETWORK),
        )
        with pytest.raises(ConfigError):
            WorkloadDefinition(steps=steps)

    def test_missing_dependency_rejected(self):
        steps = (
            StepSpec(
                "create subnet",
                "network",
                StepAction.CREATE,
                creates=EntityKind.SUBNET,
                depends_on=("create network",),
            ),
            StepSpec(
                "delete subnet",
                "network",
                StepAction.DELETE,
                deletes=EntityKind.SUBNET,
                undo_of="create subnet",
            ),
        )
        with pytest.raises(ConfigError):
            WorkloadDefinition(steps=steps)


# ── Timing ───────────────────────────────────────────────────────────────


class TestServiceTime:
    def test_base_times(self):
        cloud = quiet_cloud()
        assert service_time("create user", cloud) == 2.0
        assert service_time("boot server", cloud) == 10.0
        assert service_time("create volume", cloud) == 5.0

    def test_contention_scales_linearly(self):
        cloud = quiet_cloud()
        assert service_time("create user", cloud, gate_count=10) == 20.0
        values = [service_time("create user", cloud, gate_count=g) for g in range(12)]
        assert values == sorted(values)

    def test_contention_capacity_divides_the_crowd(self):
        cloud = quiet_cloud(contention_capacity=2.0)
        assert service_time("create user", cloud, gate_count=10) == 10.0
        assert service_time("create user", cloud, gate_count=1) == 2.0

    def test_ageing_multiplier_applies(self):
        params = ResourceParams(
            warmup_noise_gb=0.0, warmup_alloc_gb=0.0, ageing_rate=0.001
        )
        cloud = CloudState(params=params)
        cloud.ageing_units = 1000.0
        cloud._recompute_ageing()
        assert service_time("create user", cloud) == pytest.approx(4.0)

    def test_timing_document_round_trip(self):
        timing = TimingParams(default_seconds=1.0, step_seconds={"boot server": 3.0})
        again = TimingParams.from_document(timing.to_document())
        assert again == timing

    def test_empty_overrides_survive_round_trip(self):
        timing = TimingParams(step_seconds={})
        assert TimingParams.from_document(timing.to_document()).step_seconds == {}


# ── Single clean run ─────────────────────────────────────────────────────


class TestCleanRun:
    def test_success_and_full_cleanup(self):
        cloud = quiet_cloud()
        result = run_workload(DEFN, cloud)
        assert result.status is WorkloadStatus.SUCCESS
        assert result.error is None
        assert result.leftovers_created == 0
        assert result.steps_executed == 29
        assert all(count == 0 for count in cloud.live.values())
        assert cloud.total_leftovers() == 0

    def test_duration_is_sum_of_base_times(self):
        cloud = quiet_cloud()
        result = run_workload(DEFN, cloud)
        assert result.duration == pytest.approx(CLEAN_BASE_SECONDS)
        assert cloud.clock == pytest.approx(CLEAN_BASE_SECONDS)

    def test_successful_run_ages_the_cloud(self):
        cloud = quiet_cloud()
        run_workload(DEFN, cloud)
        assert cloud.ageing_units == 1.0

    def test_boot_deposits_one_cache_image(self):
        cloud = quiet_cloud()
        run_workload(DEFN, cloud)
        assert cloud.cache_image_count() == 1


# ── Fault paths ──────────────────────────────────────────────────────────


def one_fault_model(step_name: str, error_name: str, seed: int = 0) -> FaultModel:
    return FaultModel({step_name: {error_name: 1.0}}, seed=seed)


class TestQuotaRejection:
    def test_rejection_unwinds_identity_entities(self):
        """A full security-group quota rejects the workload cleanly."""
        cloud = quiet_cloud()
        for _ in range(10):
            cloud.try_create(EntityKind.SECURITY_GROUP)
        result = run_workload(DEFN, cloud)
        assert result.status is WorkloadStatus.NON_AGEING_FAILURE
        assert result.error == "quota-exceeded-security-group"
        assert result.failed_step == "create security group"
        assert result.steps_executed == 7
        assert result.leftovers_created == 0
        assert cloud.live[EntityKind.USER] == 0
        assert cloud.live[EntityKind.ROLE] == 0

    def test_rejected_workloads_do_not_age_or_leak(self):
        cloud = quiet_cloud()
        for _ in range(10):
            cloud.try_create(EntityKind.SECURITY_GROUP)
        before = cloud.memory_available_gb()
        for _ in range(50):
            run_workload(DEFN, cloud)
        assert cloud.ageing_units == 0.0
        assert cloud.memory_available_gb() == before


class TestBootFault:
    def test_server_error_strands_exactly_one_server(self):
        cloud = quiet_cloud()
        result = run_workload(DEFN, cloud, one_fault_model("boot server", "server-error-status"))
        assert result.status is WorkloadStatus.AGEING_FAILURE
        assert result.error == "server-error-status"
        assert result.failed_step == "boot server"
        assert result.leftover_kinds == ("server",)
        assert cloud.leftovers[EntityKind.SERVER] == 1
        assert result.steps_executed == 21
        assert all(count == 0 for count in cloud.live.values())

    def test_failed_boot_deposits_no_cache_image(self):
        cloud = quiet_cloud()
        run_workload(DEFN, cloud, one_fault_model("boot server", "server-error-status"))
        assert cloud.cache_image_count() == 0


#: For a certain fault at each step: (error to inject, expected stranded
#: kind or None, expected steps executed including the unwind).
FAULT_TABLE = {
    "create user": ("node-unreachable", None, 1),
    "create role": ("node-unreachable", EntityKind.ROLE, 3),
    "add role": ("node-unreachable", None, 5),
    "create security group": ("node-unreachable", EntityKind.SECURITY_GROUP, 7),
    "create flavor": ("node-unreachable", EntityKind.FLAVOR, 9),
    "create image": ("node-unreachable", EntityKind.IMAGE, 11),
    "create network": ("node-unreachable", EntityKind.NETWORK, 13),
    "create subnet": ("node-unreachable", EntityKind.SUBNET, 15),
    "create port": ("node-unreachable", EntityKind.PORT, 17),
    "create router": ("node-unreachable", EntityKind.ROUTER, 19),
    "boot server": ("server-error-status", EntityKind.SERVER, 21),
    "create volume": ("volume-error-status", EntityKind.VOLUME, 23),
    "attach volume": ("node-unreachable", EntityKind.VOLUME, 24),
    "rebuild server": ("node-unreachable", EntityKind.SERVER, 26),
    "pause server": ("node-unreachable", EntityKind.SERVER, 27),
    "unpause server": ("node-unreachable", EntityKind.SERVER, 28),
    "detach volume": ("node-unreachable", EntityKind.VOLUME, 28),
    "delete volume": ("node-unreachable", EntityKind.VOLUME, 29),
    "delete server": ("node-unreachable", EntityKind.SERVER, 29),
    "delete router": ("node-unreachable", EntityKind.ROUTER, 29),
    "delete port": ("node-unreachable", EntityKind.PORT, 29),
    "delete subnet": ("node-unreachable", EntityKind.SUBNET, 29),
    "delete network": ("node-unreachable", EntityKind.NETWORK, 29),
    "delete image": ("node-unreachable", EntityKind.IMAGE, 29),
    "delete flavor": ("node-unreachable", EntityKind.FLAVOR, 29),
    "delete security group": ("node-unreachable", EntityKind.SECURITY_GROUP, 29),
    "revoke role": ("node-unreachable", None, 29),
    "delete role": ("node-unreachable", EntityKind.ROLE, 29),
    "delete user": ("node-unreachable", EntityKind.USER, 29),
}


class TestFaultAtEveryPosition:
    @pytest.mark.parametrize("step_name", [s.name for s in DEFN.steps])
    def test_fault_outcome(self, step_name):
        """A certain fault at any position yields the expected wreckage."""
        error_name, stranded, steps = FAULT_TABLE[step_name]
        cloud = quiet_cloud()
        result = run_workload(DEFN, cloud, one_fault_model(step_name, error_name))
        assert result.error == error_name
        assert result.failed_step == step_name
        assert result.steps_executed == steps
        if stranded is None:
            assert result.status is WorkloadStatus.NON_AGEING_FAILURE
            assert result.leftovers_created == 0
            assert cloud.total_leftovers() == 0
        else:
            assert result.status is WorkloadStatus.AGEING_FAILURE
            assert result.leftover_kinds == (stranded.value,)
            assert cloud.leftovers[stranded] == 1
            assert cloud.total_leftovers() == 1
        # Everything not stranded must have been cleaned up.
        assert all(count == 0 for count in cloud.live.values())

    def test_non_ageing_fault_leaves_no_trace(self):
        cloud = quiet_cloud()
        result = run_workload(
            DEFN, cloud, one_fault_model("create router", "external-network-unreachable")
        )
        assert result.status is WorkloadStatus.NON_AGEING_FAILURE
        assert cloud.total_leftovers() == 0

    def test_rebuild_error_is_non_ageing(self):
        cloud = quiet_cloud()
        result = run_workload(DEFN, cloud, one_fault_model("rebuild server", "rebuild-error"))
        assert result.status is WorkloadStatus.NON_AGEING_FAILURE
        assert cloud.total_leftovers() == 0
        assert all(count == 0 for count in cloud.live.values())


class TestFailedCloud:
    def test_launch_on_failed_cloud(self):
        cloud = quiet_cloud()
        cloud.failed = True
        result = run_workload(DEFN, cloud)
        assert result.status is WorkloadStatus.NON_AGEING_FAILURE
        assert result.error == CLOUD_UNAVAILABLE
        assert result.failed_step == LAUNCH_STEP
        assert result.steps_executed == 0
        assert result.duration == 2.0

    def test_own_leftovers_can_fail_the_cloud_mid_run(self):
        """The tenth stranded server flips the cloud to failed."""
        cloud = quiet_cloud()
        for _ in range(9):
            cloud.add_leftover(EntityKind.SERVER)
        faults = one_fault_model("boot server", "server-error-status")
        result = run_workload(DEFN, cloud, faults)
        assert cloud.failed
        assert result.error == "server-error-status"
        assert result.status is WorkloadStatus.AGEING_FAILURE
        assert result.steps_executed < 29


# ── Streaming ────────────────────────────────────────────────────────────


class TestRunStream:
    def test_hourly_throughput(self):
        """One slot completes floor(3600 / 69) clean workloads in an hour."""
        cloud = quiet_cloud()
        results = run_stream(DEFN, cloud, until=3600.0, concurrency=1)
        assert len(results) == int(3600.0 // CLEAN_BASE_SECONDS)
        assert all(r.status is WorkloadStatus.SUCCESS for r in results)
        assert cloud.clock == 3600.0

    def test_in_flight_workloads_are_discarded(self):
        cloud = quiet_cloud()
        results = run_stream(DEFN, cloud, until=100.0, concurrency=1)
        assert len(results) == 1
        assert results[0].ended_at == pytest.approx(CLEAN_BASE_SECONDS)

    def test_launches_are_staggered(self):
        cloud = quiet_cloud()
        results = run_stream(DEFN, cloud, until=200.0, concurrency=3)
        starts = sorted(r.started_at for r in results)
        assert starts == pytest.approx([0.0, 0.001, 0.002])

    def test_total_throughput_is_roughly_capacity_invariant(self):
        """Contention slows everyone, so more slots do not mean more work."""
        totals = {}
        for c in (1, 2, 4, 8):
            cloud = quiet_cloud()
            results = run_stream(DEFN, cloud, until=3600.0, concurrency=c)
            totals[c] = sum(r.status is WorkloadStatus.SUCCESS for r in results)
        assert totals[1] == int(3600.0 // CLEAN_BASE_SECONDS)
        # Eightfold concurrency buys well under half again as much work.
        assert max(totals.values()) <= 1.4 * totals[1]

    def test_contention_stretches_durations(self):
        """Workloads sharing the cloud take longer apiece, roughly with the crowd."""
        means = {}
        for c in (1, 2, 4):
            cloud = quiet_cloud()
            results = run_stream(DEFN, cloud, until=3600.0, concurrency=c)
            means[c] = sum(r.duration for r in results) / len(results)
        assert means[1] == pytest.approx(CLEAN_BASE_SECONDS)
        assert CLEAN_BASE_SECONDS < means[2] <= 2 * CLEAN_BASE_SECONDS
        assert means[2] < means[4] <= 4 * CLEAN_BASE_SECONDS

    def test_overload_rejections_without_leak_or_draws(self):
        """Slots beyond the quota cycle through rejections with no side effects."""
        cloud = quiet_cloud()
        for _ in range(10):
            cloud.try_create(EntityKind.SECURITY_GROUP)
        before = cloud.memory_available_gb()
        results = run_stream(DEFN, cloud, until=600.0, concurrency=4)
        assert results
        assert all(r.error == "quota-exceeded-security-group" for r in results)
        assert all(r.status is WorkloadStatus.NON_AGEING_FAILURE for r in results)
        assert cloud.memory_available_gb() == before
        assert cloud.ageing_units == 0.0

    def test_mixed_success_and_rejection_under_pressure(self):
        cloud = quiet_cloud()
        quotas = {EntityKind.SECURITY_GROUP: 2}
        cloud = CloudState(params=cloud.params, quotas=quotas)
        results = run_stream(DEFN, cloud, until=2000.0, concurrency=6)
        statuses = {r.status for r in results}
        assert WorkloadStatus.SUCCESS in statuses
        assert any(r.error == "quota-exceeded-security-group" for r in results)

    def test_stream_on_failed_cloud_parks_silently(self):
        cloud = quiet_cloud()
        cloud.failed = True
        results = run_stream(DEFN, cloud, until=600.0, concurrency=3)
        assert results == []
        assert cloud.clock == 600.0

    def test_error_hook_sees_strandings(self):
        cloud = quiet_cloud()
        seen = []
        run_stream(
            DEFN,
            cloud,
            until=300.0,
            concurrency=1,
            faults=one_fault_model("boot server", "server-error-status"),
            error_hook=lambda t, step, error, stranded: seen.append(
                (step, error, stranded)
            ),
        )
        assert seen
        assert all(item == ("boot server", "server-error-status", True) for item in seen)

    def test_tick_hook_counts_intervals(self):
        cloud = quiet_cloud()
        samples = []
        run_stream(
            DEFN,
            cloud,
            until=3600.0,
            concurrency=1,
            tick_seconds=30.0,
            tick_hook=lambda t, gauges: samples.append(t),
        )
        assert len(samples) == 120
        assert samples[0] == 0.0
        assert samples[-1] == 3570.0

    def test_hour_hook_can_stop_the_stream(self):
        cloud = quiet_cloud()
        marks = []

        def hook(t):
            marks.append(t)
            return STOP_STREAM

        results = run_stream(DEFN, cloud, until=7200.0, concurrency=1, hour_hook=hook)
        assert marks == [3600.0]
        assert cloud.clock == 3600.0
        assert all(r.ended_at <= 3600.0 for r in results)

    def test_stream_is_deterministic(self):
        def one_run():
            cloud = quiet_cloud()
            faults = FaultModel(
                {
                    "boot server": {"server-error-status": 0.1},
                    "delete network": {"node-unreachable": 0.05},
                },
                seed=42,
            )
            results = run_stream(DEFN, cloud, until=2400.0, concurrency=3, faults=faults)
            return [(r.started_at, r.ended_at, r.status, r.error) for r in results]

        assert one_run() == one_run()

    def test_successive_durations_grow_with_ageing(self):
        params = ResourceParams(warmup_noise_gb=0.0, warmup_alloc_gb=0.0, ageing_rate=0.01)
        cloud = CloudState(params=params)
        durations = [run_workload(DEFN, cloud).duration for _ in range(5)]
        assert all(b > a for a, b in zip(durations, durations[1:]))
        assert durations[1] == pytest.approx(CLEAN_BASE_SECONDS * 1.01)

    def test_zero_length_stream(self):
        cloud = quiet_cloud()
        assert run_stream(DEFN, cloud, until=0.0, concurrency=2) == []
        assert cloud.clock == 0.0

    def test_bad_concurrency_rejected(self):
        with pytest.raises(ConfigError):
            run_stream(DEFN, quiet_cloud(), until=10.0, concurrency=0)
