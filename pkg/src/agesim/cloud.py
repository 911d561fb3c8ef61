"""State of a simulated quota-limited cloud under accelerated ageing.

The cloud tracks live entities and leftover entities per kind, per-node
resource gauges (memory available, swap used, disk used), a cache-image
ledger filled by server boots, and a virtual clock.  Leftovers are
entities stranded by failed workloads; they occupy quota without being
usable, so the cloud's capacity is::

    capacity = min over quota-limited kinds of (quota - leftovers), floored at 0

Rejuvenation redeploys the cloud: entity ledgers and caches reset, swap
drops to zero and memory returns to its initial level minus a configured
host-level residual.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from .errors import ConfigError, LedgerUnderflowError
from .seeding import stream

SECONDS_PER_HOUR = 3600.0


class EntityKind(Enum):
    """Entity kinds a workload can create."""

    USER = "user"
    ROLE = "role"
    SECURITY_GROUP = "security-group"
    FLAVOR = "flavor"
    IMAGE = "image"
    NETWORK = "network"
    SUBNET = "subnet"
    PORT = "port"
    ROUTER = "router"
    SERVER = "server"
    VOLUME = "volume"


#: Kinds subject to a per-kind quota, with the default limit of 10 each.
DEFAULT_QUOTAS: dict[EntityKind, int] = {
    EntityKind.SECURITY_GROUP: 10,
    EntityKind.ROUTER: 10,
    EntityKind.SERVER: 10,
    EntityKind.VOLUME: 10,
}


def quota_error_name(kind: EntityKind) -> str:
    return f"quota-exceeded-{kind.value}"


#: Error names that indicate overload rather than ageing; reports can
#: exclude them from error distributions.
OVERLOAD_INDICATOR_ERRORS = frozenset({quota_error_name(EntityKind.SECURITY_GROUP)})


@dataclass(frozen=True)
class Topology:
    """Node layout of the deployment."""

    kind: str
    nodes: tuple[str, ...]
    control_node: str
    compute_nodes: tuple[str, ...]

    @classmethod
    def multi_node(cls) -> "Topology":
        return cls(
            kind="multi-node",
            nodes=("control", "monitoring", "compute-1", "compute-2"),
            control_node="control",
            compute_nodes=("compute-1", "compute-2"),
        )

    @classmethod
    def all_in_one(cls) -> "Topology":
        return cls(
            kind="all-in-one",
            nodes=("all-in-one",),
            control_node="all-in-one",
            compute_nodes=("all-in-one",),
        )

    @classmethod
    def named(cls, kind: str) -> "Topology":
        if kind == "multi-node":
            return cls.multi_node()
        if kind == "all-in-one":
            return cls.all_in_one()
        raise ConfigError(f"unknown topology: {kind!r}")


@dataclass(frozen=True)
class ResourceParams:
    """Resource-model rates and limits.

    The physical rates are simulation parameters, not measurements; they
    are chosen so that a day-long stress run shows the expected gauge
    shapes (memory decline, late swap growth, cache-driven disk fill)
    and every one of them can be swept through configuration.
    """

    initial_memory_gb: float = 1.5
    swap_threshold_gb: float = 1.0
    swap_capacity_gb: float = 16.0
    leak_per_workload_gb: float = 0.0005
    leftover_retention_gb: float = 0.01
    warmup_noise_gb: float = 0.3
    warmup_alloc_gb: float = 0.25
    warmup_after_rejuvenation: bool = True
    cache_image_gb: float = 0.040
    cache_max_age_seconds: float = 24 * 3600.0
    disk_capacity_gb: float = 250.0
    rejuvenation_seconds: float = 3600.0
    retention_fraction: float = 0.0
    ageing_rate: float = 0.0002
    contention_capacity: float = 1.0
    cache_depositing_steps: tuple[str, ...] = ("boot server",)

    def __post_init__(self):
        if self.initial_memory_gb <= 0:
            raise ConfigError("initial_memory_gb must be positive")
        if not 0.0 <= self.retention_fraction <= 1.0:
            raise ConfigError("retention_fraction must lie in [0, 1]")
        if self.contention_capacity <= 0:
            raise ConfigError("contention_capacity must be positive")


# ── Events consumed by apply_resource_effects ────────────────────────────


@dataclass(frozen=True)
class WorkloadStepCompleted:
    """A workload step finished successfully.

    ``workload_finished`` marks the last executed step of a workload;
    ``did_real_work`` is set when the workload created at least one
    entity, which is what makes it count toward memory leak and ageing.
    """

    step_name: str
    workload_finished: bool = False
    did_real_work: bool = False


@dataclass(frozen=True)
class IntervalElapsed:
    """A sampling interval elapsed; carries the interval length."""

    interval_seconds: float = SECONDS_PER_HOUR


# ── Creation outcomes ────────────────────────────────────────────────────


@dataclass(frozen=True)
class Created:
    kind: EntityKind


@dataclass(frozen=True)
class QuotaExceeded:
    kind: EntityKind

    @property
    def error_name(self) -> str:
        return quota_error_name(self.kind)


# ── Fault catalog and model ──────────────────────────────────────────────


class AgeingRule(Enum):
    """How an error relates to ageing."""

    NON_AGEING = "non-ageing"
    AGEING = "ageing"
    PHASE_DEPENDENT = "phase-dependent"


@dataclass(frozen=True)
class ErrorSpec:
    """Catalog entry describing an injectable error."""

    name: str
    rule: AgeingRule
    leftover_kind: EntityKind | None = None

    def __post_init__(self):
        if self.rule is AgeingRule.AGEING and self.leftover_kind is None:
            raise ConfigError(f"error {self.name!r}: ageing errors need a leftover kind")


DEFAULT_ERROR_CATALOG: dict[str, ErrorSpec] = {
    spec.name: spec
    for spec in (
        ErrorSpec("server-error-status", AgeingRule.AGEING, EntityKind.SERVER),
        ErrorSpec("volume-error-status", AgeingRule.AGEING, EntityKind.VOLUME),
        ErrorSpec("node-unreachable", AgeingRule.PHASE_DEPENDENT),
        ErrorSpec("external-network-unreachable", AgeingRule.NON_AGEING),
        ErrorSpec("rebuild-error", AgeingRule.NON_AGEING),
    )
}


class FaultModel:
    """Per-step error probabilities drawn from a dedicated random stream.

    ``probabilities`` maps step name to {error name: probability}.  At
    most one error fires per step attempt: a single uniform draw is
    compared against the cumulative probability slots, so each error
    fires with exactly its configured probability and their per-step sum
    must not exceed 1.  Steps without configured entries consume no
    random draws at all.
    """

    def __init__(
        self,
        probabilities: Mapping[str, Mapping[str, float]] | None = None,
        catalog: Mapping[str, ErrorSpec] | None = None,
        seed: int = 0,
        known_steps: Iterable[str] | None = None,
    ):
        self.catalog = dict(DEFAULT_ERROR_CATALOG)
        if catalog:
            self.catalog.update(catalog)
        if known_steps is None:
            from .workload import DEFAULT_STEP_NAMES  # late import, no cycle

            known_steps = DEFAULT_STEP_NAMES
        self.known_steps = frozenset(known_steps)
        self.seed = seed
        self._rng = stream(seed, "faults")

        self._per_step: dict[str, list[tuple[float, ErrorSpec]]] = {}
        for step_name, entries in (probabilities or {}).items():
            if step_name not in self.known_steps:
                raise ConfigError(f"fault probabilities name unknown step {step_name!r}")
            slots: list[tuple[float, ErrorSpec]] = []
            cumulative = 0.0
            for error_name, p in entries.items():
                if error_name not in self.catalog:
                    raise ConfigError(f"unknown error name {error_name!r}")
                if not 0.0 <= p <= 1.0:
                    raise ConfigError(f"probability {p} for {error_name!r} not in [0, 1]")
                cumulative += p
                if p > 0.0:
                    slots.append((cumulative, self.catalog[error_name]))
            if cumulative > 1.0 + 1e-12:
                raise ConfigError(
                    f"per-step probabilities for {step_name!r} sum to {cumulative} > 1"
                )
            if slots:
                self._per_step[step_name] = slots

    def draw(self, step_name: str) -> ErrorSpec | None:
        """Sample the error, if any, striking this step attempt."""
        if step_name not in self.known_steps:
            raise ConfigError(f"unknown step name {step_name!r}")
        slots = self._per_step.get(step_name)
        if not slots:
            return None
        u = self._rng.random()
        for threshold, spec in slots:
            if u < threshold:
                return spec
        return None


def sample_fault(model: FaultModel, step_name: str, state: "CloudState | None" = None):
    """Sample an injected error for one step attempt.

    Sampling depends only on the model's configuration and stream
    position; ``state`` is accepted for call-site symmetry and the
    phase-dependent resolution happens in the workload engine, which
    knows what the current workload has created.
    """
    return model.draw(step_name)


# ── Cloud state ──────────────────────────────────────────────────────────


class CloudState:
    """Mutable ledger-and-gauge state of the simulated cloud."""

    def __init__(
        self,
        topology: Topology | None = None,
        params: ResourceParams | None = None,
        quotas: Mapping[EntityKind, int] | None = None,
        seed: int = 0,
    ):
        self.topology = topology or Topology.multi_node()
        self.params = params or ResourceParams()
        self.quotas = dict(DEFAULT_QUOTAS)
        if quotas:
            self.quotas.update(quotas)
        for kind, quota in self.quotas.items():
            if quota < 1:
                raise ConfigError(f"quota for {kind.value} must be >= 1, got {quota}")

        self.live: dict[EntityKind, int] = {k: 0 for k in EntityKind}
        self.leftovers: dict[EntityKind, int] = {k: 0 for k in EntityKind}
        self.clock = 0.0
        self.failed = False
        self.failed_at: float | None = None
        self.rejuvenation_count = 0
        self.ageing_units = 0.0

        self._consumed_gb = 0.0
        self._host_residual_gb = 0.0
        self._noise_gb = 0.0
        self._warmup_start: float | None = 0.0
        self._warmup_alloc_pending = True
        self._cache: deque[tuple[float, float, str]] = deque()
        self._cache_total: dict[str, float] = {n: 0.0 for n in self.topology.nodes}
        self._next_compute = 0
        self._noise_rng = stream(seed, "noise")
        self._ageing_multiplier = 1.0

    # -- capacity and ledgers ------------------------------------------------

    def capacity(self) -> int:
        """Workloads still executable concurrently, as limited by leftovers."""
        leftovers = self.leftovers
        return max(
            0, min(quota - leftovers[kind] for kind, quota in self.quotas.items())
        )

    def try_create(self, kind: EntityKind) -> Created | QuotaExceeded:
        """Create one entity; quota-limited kinds count live plus leftovers."""
        quota = self.quotas.get(kind)
        if quota is not None and self.live[kind] + self.leftovers[kind] >= quota:
            return QuotaExceeded(kind)
        self.live[kind] += 1
        return Created(kind)

    def try_delete(self, kind: EntityKind) -> None:
        """Delete one live entity; underflow is a programming error."""
        if self.live[kind] <= 0:
            raise LedgerUnderflowError(f"no live {kind.value} to delete")
        self.live[kind] -= 1

    def add_leftover(self, kind: EntityKind, from_live: bool = False) -> None:
        """Record a stranded entity; it occupies quota until rejuvenation.

        ``from_live`` moves an existing live entity into the leftover
        ledger (a failed delete); otherwise the leftover is a fresh
        entity created in an error state.  Either way it retains a
        configured slice of memory until the next rejuvenation.
        """
        if from_live:
            self.try_delete(kind)
        self.leftovers[kind] += 1
        self._consumed_gb += self.params.leftover_retention_gb

    def total_leftovers(self) -> int:
        return sum(self.leftovers.values())

    # -- gauges ----------------------------------------------------------------

    def _raw_available_gb(self) -> float:
        return (
            self.params.initial_memory_gb - self._host_residual_gb - self._consumed_gb
        )

    def memory_available_gb(self, node: str | None = None) -> float:
        """Available memory on a node; the model runs on the control node."""
        node = node or self.topology.control_node
        if node != self.topology.control_node:
            return self.params.initial_memory_gb
        return max(0.0, self._raw_available_gb() + self._noise_gb)

    def swap_used_gb(self, node: str | None = None) -> float:
        """Swap in use; grows once raw available memory sinks below the threshold."""
        node = node or self.topology.control_node
        if node != self.topology.control_node:
            return 0.0
        overflow = self.params.swap_threshold_gb - self._raw_available_gb()
        return min(max(0.0, overflow), self.params.swap_capacity_gb)

    def disk_used_gb(self, node: str) -> float:
        return self._cache_total.get(node, 0.0)

    def cache_disk_usage_gb(self) -> float:
        return sum(size for _, size, _ in self._cache)

    def cache_image_count(self) -> int:
        return len(self._cache)

    def read_gauges(self) -> dict[str, dict[str, float]]:
        """Snapshot of every node's gauges at the current clock."""
        return {
            node: {
                "memory_available": self.memory_available_gb(node),
                "swap_used": self.swap_used_gb(node),
                "disk_used": self.disk_used_gb(node),
                "disk_capacity": self.params.disk_capacity_gb,
            }
            for node in self.topology.nodes
        }

    # -- ageing bookkeeping ------------------------------------------------------

    def ageing_multiplier(self) -> float:
        return self._ageing_multiplier

    def _recompute_ageing(self) -> None:
        self._ageing_multiplier = 1.0 + self.params.ageing_rate * self.ageing_units

    def _in_warmup_window(self) -> bool:
        return (
            self._warmup_start is not None
            and self._warmup_start <= self.clock < self._warmup_start + SECONDS_PER_HOUR
        )

    def deposit_cache_image(self) -> None:
        """One boot completed: place a cache image on the next compute node."""
        computes = self.topology.compute_nodes
        node = computes[self._next_compute % len(computes)]
        self._next_compute += 1
        size = self.params.cache_image_gb
        self._cache.append((self.clock, size, node))
        self._cache_total[node] += size


# ── Operations on the cloud ──────────────────────────────────────────────


def capacity(state: CloudState) -> int:
    return state.capacity()


def try_create(state: CloudState, kind: EntityKind) -> Created | QuotaExceeded:
    return state.try_create(kind)


def try_delete(state: CloudState, kind: EntityKind) -> None:
    state.try_delete(kind)


def apply_resource_effects(
    state: CloudState, event: WorkloadStepCompleted | IntervalElapsed
) -> dict[str, dict[str, float]]:
    """Fold one event into the resource gauges and return them.

    Step completions deposit cache images (for configured steps, server
    boots by default) and, on the final step of a workload that created
    entities, charge the per-workload memory leak and one ageing unit.
    Interval events refresh the warm-up behaviour: during the first hour
    of a deployment (and of a post-rejuvenation window, when enabled) a
    one-time allocation lands and the memory reading carries seeded
    noise; outside warm-up the noise term is zero and no draws happen.
    """
    params = state.params
    if isinstance(event, WorkloadStepCompleted):
        if event.step_name in params.cache_depositing_steps:
            state.deposit_cache_image()
        if event.workload_finished and event.did_real_work:
            state._consumed_gb += params.leak_per_workload_gb
            state.ageing_units += 1.0
            state._recompute_ageing()
    elif isinstance(event, IntervalElapsed):
        if state._in_warmup_window():
            if state._warmup_alloc_pending:
                state._consumed_gb += params.warmup_alloc_gb
                state._warmup_alloc_pending = False
            amp = params.warmup_noise_gb
            state._noise_gb = float(state._noise_rng.uniform(-amp, amp)) if amp else 0.0
        else:
            state._noise_gb = 0.0
    else:
        raise TypeError(f"unsupported event: {event!r}")
    return state.read_gauges()


def cache_cleanup(state: CloudState) -> float:
    """Drop cache images older than the configured age; return GB freed."""
    max_age = state.params.cache_max_age_seconds
    freed = 0.0
    cache = state._cache
    while cache and state.clock - cache[0][0] > max_age:
        _, size, node = cache.popleft()
        state._cache_total[node] -= size
        freed += size
    return freed


def check_failed(state: CloudState) -> bool:
    """Evaluate the failure predicate and update the state's flag.

    The cloud has failed when its capacity is zero, any node's disk is
    full, or available memory plus remaining swap headroom is exhausted.
    A failed cloud stays failed until rejuvenation; the first time the
    predicate turns true the virtual time is latched into ``failed_at``.
    """
    if not state.failed:
        raw = state._raw_available_gb()
        available = max(0.0, raw)
        headroom = state.params.swap_capacity_gb - state.swap_used_gb()
        state.failed = (
            state.capacity() == 0
            or any(
                state.disk_used_gb(n) >= state.params.disk_capacity_gb
                for n in state.topology.nodes
            )
            or available + headroom <= 0.0
        )
        if state.failed and state.failed_at is None:
            state.failed_at = state.clock
    return state.failed


def rejuvenate(state: CloudState) -> None:
    """Redeploy the cloud: reset ledgers, caches and swap; restore memory.

    A configured fraction of the accumulated cloud-level ageing survives
    as a host-level residual (memory restored to initial minus residual,
    ageing units scaled by the same fraction).  The virtual clock
    advances by the configured rejuvenation duration.
    """
    params = state.params
    state._host_residual_gb += params.retention_fraction * state._consumed_gb
    state.ageing_units *= params.retention_fraction
    state._recompute_ageing()
    state._consumed_gb = 0.0
    for kind in EntityKind:
        state.live[kind] = 0
        state.leftovers[kind] = 0
    state._cache.clear()
    for node in state._cache_total:
        state._cache_total[node] = 0.0
    state._noise_gb = 0.0
    state.failed = False
    state.clock += params.rejuvenation_seconds
    state.rejuvenation_count += 1
    if params.warmup_after_rejuvenation:
        state._warmup_start = state.clock
        state._warmup_alloc_pending = True
    else:
        state._warmup_start = None
