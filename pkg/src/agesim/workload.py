"""Workload engine: multi-step provisioning runs against the simulated cloud.

A workload is an ordered list of steps that create entities, operate on
them and delete them again.  The default definition is a 29-step tour
through identity, network, image, compute and volume services whose
cleanup tail undoes every acquisition in strict reverse (LIFO) order.

Execution semantics, shared by the single-run and streaming drivers:

* Create steps check quota first; a quota rejection is a domain error
  recorded without consuming a fault draw.
* After the quota gate, an injected error may strike any step.  Ageing
  errors strand an entity as a leftover; phase-dependent errors strand
  the entity the step was touching, unless nothing has been provisioned
  yet; non-ageing errors leave no trace beyond the failure record.
* A faulted delete step always strands the entity it was deleting.
* The first error aborts forward progress and unwinds the outstanding
  cleanup stack; unwind steps run (and may fault) like any others.

A workload is classified ``success`` when no error occurred,
``ageing-failure`` when it stranded at least one leftover, and
``non-ageing-failure`` otherwise.

Step durations model contention and ageing::

    duration = base_seconds * ageing_multiplier * max(1, holders / contention_capacity)

where ``holders`` counts in-flight workloads holding at least one live
quota-limited entity.  Workloads queueing at the quota gate therefore
slow down with the crowd but do not add to it.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, Iterable, Mapping

from .cloud import (
    AgeingRule,
    CloudState,
    EntityKind,
    FaultModel,
    IntervalElapsed,
    QuotaExceeded,
    WorkloadStepCompleted,
    apply_resource_effects,
    check_failed,
)
from .errors import ConfigError

#: Error name recorded when the cloud is unusable at or during a run.
CLOUD_UNAVAILABLE = "cloud-unavailable"

#: Pseudo step name for failures that precede the first real step.
LAUNCH_STEP = "launch"

#: Sentinel an hour hook may return to stop a stream at that hour mark.
STOP_STREAM = object()


class StepAction(Enum):
    CREATE = "create"
    OPERATE = "operate"
    DELETE = "delete"


@dataclass(frozen=True)
class StepSpec:
    """One step of a workload definition.

    ``creates``/``deletes`` name the entity kind a create or delete step
    touches; ``operates_on`` names the entity an operate step acts upon
    (None for pure control-plane calls such as role grants).  ``undo_of``
    marks cleanup steps with the step they reverse.
    """

    name: str
    service: str
    action: StepAction
    creates: EntityKind | None = None
    deletes: EntityKind | None = None
    operates_on: EntityKind | None = None
    depends_on: tuple[str, ...] = ()
    undo_of: str | None = None

    def __post_init__(self):
        if self.action is StepAction.CREATE and self.creates is None:
            raise ConfigError(f"create step {self.name!r} names no entity kind")
        if self.action is StepAction.DELETE:
            if self.deletes is None:
                raise ConfigError(f"delete step {self.name!r} names no entity kind")
            if self.undo_of is None:
                raise ConfigError(f"delete step {self.name!r} must undo a create step")
        if self.action is not StepAction.CREATE and self.creates is not None:
            raise ConfigError(f"step {self.name!r} cannot create entities")
        if self.action is not StepAction.DELETE and self.deletes is not None:
            raise ConfigError(f"step {self.name!r} cannot delete entities")


def _steps() -> tuple[StepSpec, ...]:
    create = StepAction.CREATE
    operate = StepAction.OPERATE
    delete = StepAction.DELETE
    K = EntityKind
    return (
        StepSpec("create user", "identity", create, creates=K.USER),
        StepSpec("create role", "identity", create, creates=K.ROLE),
        StepSpec(
            "add role",
            "identity",
            operate,
            depends_on=("create user", "create role"),
        ),
        StepSpec("create security group", "network", create, creates=K.SECURITY_GROUP),
        StepSpec("create flavor", "compute", create, creates=K.FLAVOR),
        StepSpec("create image", "image", create, creates=K.IMAGE),
        StepSpec("create network", "network", create, creates=K.NETWORK),
        StepSpec(
            "create subnet",
            "network",
            create,
            creates=K.SUBNET,
            depends_on=("create network",),
        ),
        StepSpec(
            "create port",
            "network",
            create,
            creates=K.PORT,
            depends_on=("create network", "create subnet"),
        ),
        StepSpec(
            "create router",
            "network",
            create,
            creates=K.ROUTER,
            depends_on=("create network", "create subnet"),
        ),
        StepSpec(
            "boot server",
            "compute",
            create,
            creates=K.SERVER,
            depends_on=("create flavor", "create image", "create network"),
        ),
        StepSpec("create volume", "volume", create, creates=K.VOLUME),
        StepSpec(
            "attach volume",
            "volume",
            operate,
            operates_on=K.VOLUME,
            depends_on=("boot server", "create volume"),
        ),
        StepSpec(
            "rebuild server",
            "compute",
            operate,
            operates_on=K.SERVER,
            depends_on=("boot server", "create image"),
        ),
        StepSpec(
            "pause server",
            "compute",
            operate,
            operates_on=K.SERVER,
            depends_on=("boot server",),
        ),
        StepSpec(
            "unpause server",
            "compute",
            operate,
            operates_on=K.SERVER,
            depends_on=("pause server",),
            undo_of="pause server",
        ),
        StepSpec(
            "detach volume",
            "volume",
            operate,
            operates_on=K.VOLUME,
            depends_on=("attach volume",),
            undo_of="attach volume",
        ),
        StepSpec("delete volume", "volume", delete, deletes=K.VOLUME, undo_of="create volume"),
        StepSpec("delete server", "compute", delete, deletes=K.SERVER, undo_of="boot server"),
        StepSpec("delete router", "network", delete, deletes=K.ROUTER, undo_of="create router"),
        StepSpec("delete port", "network", delete, deletes=K.PORT, undo_of="create port"),
        StepSpec("delete subnet", "network", delete, deletes=K.SUBNET, undo_of="create subnet"),
        StepSpec("delete network", "network", delete, deletes=K.NETWORK, undo_of="create network"),
        StepSpec("delete image", "image", delete, deletes=K.IMAGE, undo_of="create image"),
        StepSpec("delete flavor", "compute", delete, deletes=K.FLAVOR, undo_of="create flavor"),
        StepSpec(
            "delete security group",
            "network",
            delete,
            deletes=K.SECURITY_GROUP,
            undo_of="create security group",
        ),
        StepSpec("revoke role", "identity", operate, undo_of="add role"),
        StepSpec("delete role", "identity", delete, deletes=K.ROLE, undo_of="create role"),
        StepSpec("delete user", "identity", delete, deletes=K.USER, undo_of="create user"),
    )


DEFAULT_STEPS: tuple[StepSpec, ...] = _steps()

#: Step names of the default definition; the fault model validates
#: configured step names against this list unless told otherwise.
DEFAULT_STEP_NAMES: tuple[str, ...] = tuple(s.name for s in DEFAULT_STEPS)


@dataclass(frozen=True)
class TimingParams:
    """Base service times in seconds.

    Most control-plane calls share one base time; the slow paths (server
    boot, volume creation) carry overrides.  ``failed_launch_seconds``
    is the time burned learning that a failed cloud will not take work.
    """

    default_seconds: float = 2.0
    step_seconds: Mapping[str, float] = field(
        default_factory=lambda: {"boot server": 10.0, "create volume": 5.0}
    )
    failed_launch_seconds: float = 2.0

    def __post_init__(self):
        if self.default_seconds <= 0:
            raise ConfigError("default_seconds must be positive")
        for name, seconds in self.step_seconds.items():
            if seconds <= 0:
                raise ConfigError(f"step time for {name!r} must be positive")

    def base_for(self, step_name: str) -> float:
        return self.step_seconds.get(step_name, self.default_seconds)

    def to_document(self) -> dict:
        return {
            "default_seconds": self.default_seconds,
            "step_seconds": dict(self.step_seconds),
            "failed_launch_seconds": self.failed_launch_seconds,
        }

    @classmethod
    def from_document(cls, doc: Mapping) -> "TimingParams":
        known = {"default_seconds", "step_seconds", "failed_launch_seconds"}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown timing fields: {sorted(unknown)}")
        if "step_seconds" in doc:
            step_seconds = {str(k): float(v) for k, v in dict(doc["step_seconds"]).items()}
        else:
            step_seconds = {"boot server": 10.0, "create volume": 5.0}
        return cls(
            default_seconds=float(doc.get("default_seconds", 2.0)),
            step_seconds=step_seconds,
            failed_launch_seconds=float(doc.get("failed_launch_seconds", 2.0)),
        )


@dataclass(frozen=True)
class WorkloadDefinition:
    """An ordered, validated step list with a LIFO cleanup tail."""

    steps: tuple[StepSpec, ...]

    def __post_init__(self):
        names = [s.name for s in self.steps]
        if len(set(names)) != len(names):
            raise ConfigError("step names must be unique")
        index = {name: i for i, name in enumerate(names)}
        undone: dict[str, int] = {}
        for i, step in enumerate(self.steps):
            for dep in step.depends_on:
                if index.get(dep, i) >= i:
                    raise ConfigError(
                        f"step {step.name!r} depends on {dep!r} which does not precede it"
                    )
            if step.undo_of is not None:
                target = index.get(step.undo_of)
                if target is None or target >= i:
                    raise ConfigError(
                        f"step {step.name!r} undoes {step.undo_of!r} which does not precede it"
                    )
                if step.undo_of in undone:
                    raise ConfigError(f"step {step.undo_of!r} is undone twice")
                undone[step.undo_of] = i
                doer = self.steps[target]
                if step.action is StepAction.DELETE and doer.creates != step.deletes:
                    raise ConfigError(
                        f"step {step.name!r} deletes {step.deletes} but "
                        f"{doer.name!r} creates {doer.creates}"
                    )
        for step in self.steps:
            if step.action is StepAction.CREATE and step.name not in undone:
                raise ConfigError(f"create step {step.name!r} has no delete step")
        # Cleanup must be LIFO: scanning undo steps in order, the steps
        # they reverse must appear in strictly decreasing position.
        targets = [index[s.undo_of] for s in self.steps if s.undo_of is not None]
        if any(a <= b for a, b in zip(targets, targets[1:])):
            raise ConfigError("cleanup steps do not reverse acquisitions in LIFO order")

    @cached_property
    def by_name(self) -> dict[str, StepSpec]:
        return {s.name: s for s in self.steps}

    @cached_property
    def undo_name(self) -> dict[str, str]:
        """Map from a step's name to the name of the step that undoes it."""
        return {s.undo_of: s.name for s in self.steps if s.undo_of is not None}

    @classmethod
    def default(cls) -> "WorkloadDefinition":
        return cls(steps=DEFAULT_STEPS)

    def to_document(self) -> dict:
        return {
            "steps": [
                {
                    "name": s.name,
                    "service": s.service,
                    "action": s.action.value,
                    "creates": s.creates.value if s.creates else None,
                    "deletes": s.deletes.value if s.deletes else None,
                    "operates_on": s.operates_on.value if s.operates_on else None,
                    "depends_on": list(s.depends_on),
                    "undo_of": s.undo_of,
                }
                for s in self.steps
            ]
        }

    @classmethod
    def from_document(cls, doc: Mapping) -> "WorkloadDefinition":
        try:
            raw_steps = doc["steps"]
        except (KeyError, TypeError):
            raise ConfigError("workload document needs a 'steps' list") from None
        steps = []
        for raw in raw_steps:
            try:
                steps.append(
                    StepSpec(
                        name=str(raw["name"]),
                        service=str(raw.get("service", "unknown")),
                        action=StepAction(raw["action"]),
                        creates=EntityKind(raw["creates"]) if raw.get("creates") else None,
                        deletes=EntityKind(raw["deletes"]) if raw.get("deletes") else None,
                        operates_on=(
                            EntityKind(raw["operates_on"]) if raw.get("operates_on") else None
                        ),
                        depends_on=tuple(raw.get("depends_on", ())),
                        undo_of=raw.get("undo_of"),
                    )
                )
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"bad step entry {raw!r}: {exc}") from None
        return cls(steps=tuple(steps))


class WorkloadStatus(Enum):
    SUCCESS = "success"
    AGEING_FAILURE = "ageing-failure"
    NON_AGEING_FAILURE = "non-ageing-failure"


@dataclass(frozen=True)
class WorkloadResult:
    """Outcome of one workload run."""

    started_at: float
    ended_at: float
    status: WorkloadStatus
    error: str | None
    failed_step: str | None
    leftovers_created: int
    leftover_kinds: tuple[str, ...]
    steps_executed: int

    @property
    def duration(self) -> float:
        return self.ended_at - self.started_at


def service_time(
    step_name: str,
    cloud: CloudState,
    gate_count: int = 0,
    timing: TimingParams | None = None,
) -> float:
    """Duration of one step under the current ageing and contention."""
    timing = timing or TimingParams()
    contention = max(1.0, gate_count / cloud.params.contention_capacity)
    return timing.base_for(step_name) * cloud.ageing_multiplier() * contention


class _Execution:
    """State machine advancing one workload step by step."""

    __slots__ = (
        "defn",
        "cloud",
        "faults",
        "timing",
        "started_at",
        "index",
        "stack",
        "pending_undos",
        "error",
        "failed_step",
        "steps_executed",
        "gated_live",
        "gated_creates",
        "completed_creates",
        "leftover_kinds",
        "last_step",
        "slot",
    )

    def __init__(
        self,
        defn: WorkloadDefinition,
        cloud: CloudState,
        faults: FaultModel | None,
        timing: TimingParams,
        started_at: float,
        slot: int = 0,
    ):
        self.defn = defn
        self.cloud = cloud
        self.faults = faults
        self.timing = timing
        self.started_at = started_at
        self.slot = slot
        self.index = 0
        # Undo stack entries: (undo step name, entity kind or None).
        self.stack: list[tuple[str, EntityKind | None]] = []
        self.pending_undos: list[tuple[str, EntityKind | None]] | None = None
        self.error: str | None = None
        self.failed_step: str | None = None
        self.steps_executed = 0
        self.gated_live = 0
        self.gated_creates = 0
        self.completed_creates = 0
        self.leftover_kinds: list[str] = []
        self.last_step = LAUNCH_STEP

    # -- helpers ------------------------------------------------------------

    def holds_gate(self) -> bool:
        return self.gated_live > 0

    def _is_gated(self, kind: EntityKind) -> bool:
        return kind in self.cloud.quotas

    def _record_error(self, step_name: str, error_name: str) -> None:
        if self.error is None:
            self.error = error_name
            self.failed_step = step_name

    def _abort(self) -> None:
        if self.pending_undos is None:
            self.pending_undos = self.stack
            self.stack = []

    def _strand(self, kind: EntityKind, entry_index: int | None) -> None:
        """Move a live entity into the leftover ledger.

        ``entry_index`` removes the matching undo entry so the unwind
        will not try to delete what is now stranded.
        """
        if entry_index is not None:
            del self.stack[entry_index]
        self.cloud.add_leftover(kind, from_live=True)
        if self._is_gated(kind):
            self.gated_live -= 1
        self.leftover_kinds.append(kind.value)

    def _topmost_entry(self, kind: EntityKind | None) -> tuple[int, EntityKind] | None:
        """Most recent stack entry holding an entity, optionally of one kind."""
        for i in range(len(self.stack) - 1, -1, -1):
            entry_kind = self.stack[i][1]
            if entry_kind is not None and (kind is None or entry_kind is kind):
                return i, entry_kind
        return None

    def _apply_fault(self, step: StepSpec, spec) -> bool:
        """Resolve an injected error; returns True if a leftover was stranded.

        Delete steps are handled by the caller (the delete target itself
        strands); this covers create and operate steps.
        """
        self._record_error(step.name, spec.name)
        if spec.rule is AgeingRule.AGEING:
            found = self._topmost_entry(spec.leftover_kind)
            if found is not None:
                self._strand(spec.leftover_kind, found[0])
            else:
                # No live entity of that kind in hand: the error still
                # strands a fresh entity in error state.
                self.cloud.add_leftover(spec.leftover_kind)
                self.leftover_kinds.append(spec.leftover_kind.value)
            return True
        if spec.rule is AgeingRule.PHASE_DEPENDENT:
            if step.action is StepAction.CREATE:
                # The interrupted creation strands the entity it was
                # making, unless the workload had provisioned nothing
                # yet, in which case the call never reached the node.
                own = self._topmost_entry(step.creates)
                if self.completed_creates > 0 and own is not None:
                    self._strand(step.creates, own[0])
                    return True
                if own is not None:
                    self._roll_back_create(step.creates, own[0])
                return False
            if step.operates_on is not None:
                found = self._topmost_entry(step.operates_on)
                if found is not None:
                    self._strand(step.operates_on, found[0])
                    return True
            return False
        if spec.rule is AgeingRule.NON_AGEING and step.action is StepAction.CREATE:
            # The creation failed outright; roll it back.
            own = self._topmost_entry(step.creates)
            if own is not None:
                self._roll_back_create(step.creates, own[0])
        return False

    def _roll_back_create(self, kind: EntityKind, entry_index: int) -> None:
        """Undo a just-made creation that the injected error voided."""
        del self.stack[entry_index]
        self.cloud.try_delete(kind)
        if self._is_gated(kind):
            self.gated_live -= 1
            self.gated_creates -= 1

    # -- one step ------------------------------------------------------------

    def run_one(self, ambient_gate_count: int) -> tuple[float, tuple[str, str, bool] | None, bool]:
        """Execute the next step.

        Returns (duration, error event or None, workload finished after
        this step).  ``ambient_gate_count`` counts gate-holding workloads
        other than this one; the duration includes this workload's own
        gate if it holds one once the step has resolved.
        """
        if self.pending_undos is not None:
            step = self.defn.by_name[self.pending_undos.pop()[0]]
            event = self._run_unwind_step(step)
        else:
            step = self.defn.steps[self.index]
            self.index += 1
            event = self._run_forward_step(step)
        self.steps_executed += 1
        self.last_step = step.name
        if event is None and step.name in self.cloud.params.cache_depositing_steps:
            apply_resource_effects(self.cloud, WorkloadStepCompleted(step.name))
        gate = ambient_gate_count + (1 if self.holds_gate() else 0)
        duration = service_time(step.name, self.cloud, gate, self.timing)
        finished = (
            self.pending_undos is not None and not self.pending_undos
        ) or (self.pending_undos is None and self.index >= len(self.defn.steps))
        return duration, event, finished

    def _draw(self, step_name: str):
        return self.faults.draw(step_name) if self.faults is not None else None

    def _run_forward_step(self, step: StepSpec) -> tuple[str, str, bool] | None:
        if step.action is StepAction.CREATE:
            outcome = self.cloud.try_create(step.creates)
            if isinstance(outcome, QuotaExceeded):
                self._record_error(step.name, outcome.error_name)
                self._abort()
                return (step.name, outcome.error_name, False)
            self.stack.append((self.defn.undo_name[step.name], step.creates))
            if self._is_gated(step.creates):
                self.gated_live += 1
                self.gated_creates += 1
            spec = self._draw(step.name)
            if spec is not None:
                stranded = self._apply_fault(step, spec)
                self._abort()
                return (step.name, spec.name, stranded)
            self.completed_creates += 1
            return None

        if step.action is StepAction.OPERATE:
            if step.undo_of is not None:
                entry = self.stack.pop()
                assert entry[0] == step.name, "cleanup order diverged from the stack"
            spec = self._draw(step.name)
            if spec is not None:
                stranded = self._apply_fault(step, spec)
                self._abort()
                return (step.name, spec.name, stranded)
            if step.name in self.defn.undo_name:
                self.stack.append((self.defn.undo_name[step.name], None))
            return None

        # Delete step in the normal flow.
        entry = self.stack.pop()
        assert entry[0] == step.name, "cleanup order diverged from the stack"
        return self._delete_with_faults(step)

    def _run_unwind_step(self, step: StepSpec) -> tuple[str, str, bool] | None:
        if step.action is StepAction.DELETE:
            return self._delete_with_faults(step)
        # Undo of an operate step (role revoke, detach, unpause): a fault
        # here is recorded but strands nothing, and unwinding continues.
        spec = self._draw(step.name)
        if spec is not None:
            self._record_error(step.name, spec.name)
            return (step.name, spec.name, False)
        return None

    def _delete_with_faults(self, step: StepSpec) -> tuple[str, str, bool] | None:
        """Run a delete step; any fault strands the delete target."""
        spec = self._draw(step.name)
        if spec is not None:
            self._record_error(step.name, spec.name)
            self.cloud.add_leftover(step.deletes, from_live=True)
            if self._is_gated(step.deletes):
                self.gated_live -= 1
            self.leftover_kinds.append(step.deletes.value)
            self._abort()
            return (step.name, spec.name, True)
        self.cloud.try_delete(step.deletes)
        if self._is_gated(step.deletes):
            self.gated_live -= 1
        return None

    # -- completion ------------------------------------------------------------

    def abort_unavailable(self, step_name: str | None = None) -> None:
        """The cloud failed under this workload; cut it short."""
        self._record_error(step_name or self._next_step_name(), CLOUD_UNAVAILABLE)
        self.pending_undos = []
        self.stack = []
        self.gated_live = 0

    def _next_step_name(self) -> str:
        if self.pending_undos:
            return self.pending_undos[-1][0]
        if self.pending_undos is None and self.index < len(self.defn.steps):
            return self.defn.steps[self.index].name
        return self.last_step

    def finalize(self, ended_at: float) -> WorkloadResult:
        if self.steps_executed > 0:
            apply_resource_effects(
                self.cloud,
                WorkloadStepCompleted(
                    self.last_step,
                    workload_finished=True,
                    did_real_work=self.gated_creates > 0,
                ),
            )
        if self.error is None:
            status = WorkloadStatus.SUCCESS
        elif self.leftover_kinds:
            status = WorkloadStatus.AGEING_FAILURE
        else:
            status = WorkloadStatus.NON_AGEING_FAILURE
        return WorkloadResult(
            started_at=self.started_at,
            ended_at=ended_at,
            status=status,
            error=self.error,
            failed_step=self.failed_step,
            leftovers_created=len(self.leftover_kinds),
            leftover_kinds=tuple(self.leftover_kinds),
            steps_executed=self.steps_executed,
        )


def run_workload(
    defn: WorkloadDefinition,
    cloud: CloudState,
    faults: FaultModel | None = None,
    timing: TimingParams | None = None,
) -> WorkloadResult:
    """Run one workload to completion, advancing the cloud's clock."""
    timing = timing or TimingParams()
    start = cloud.clock
    if cloud.failed:
        end = start + timing.failed_launch_seconds
        cloud.clock = end
        return WorkloadResult(
            started_at=start,
            ended_at=end,
            status=WorkloadStatus.NON_AGEING_FAILURE,
            error=CLOUD_UNAVAILABLE,
            failed_step=LAUNCH_STEP,
            leftovers_created=0,
            leftover_kinds=(),
            steps_executed=0,
        )
    execution = _Execution(defn, cloud, faults, timing, started_at=start)
    t = start
    while True:
        cloud.clock = t
        duration, _event, finished = execution.run_one(0)
        check_failed(cloud)
        t += duration
        if finished:
            break
        if cloud.failed:
            execution.abort_unavailable()
            break
    cloud.clock = t
    return execution.finalize(t)


def run_stream(
    defn: WorkloadDefinition,
    cloud: CloudState,
    *,
    until: float,
    concurrency: int = 1,
    faults: FaultModel | None = None,
    timing: TimingParams | None = None,
    tick_seconds: float | None = None,
    tick_hook: Callable[[float, dict], None] | None = None,
    hour_seconds: float = 3600.0,
    hour_hook: Callable[[float], object] | None = None,
    error_hook: Callable[[float, str, str, bool], None] | None = None,
    result_hook: Callable[[WorkloadResult], None] | None = None,
    collect: bool = True,
    launch_stagger: float = 0.001,
) -> list[WorkloadResult]:
    """Run back-to-back workloads on ``concurrency`` slots until a deadline.

    Events are processed in virtual-time order; at equal times workload
    events run before interval ticks, and ticks before hour marks, so
    samples and hooks observe completed state.  ``tick_hook`` receives
    (time, gauges) for every elapsed sampling interval; ``hour_hook``
    runs at whole-hour marks and may return ``STOP_STREAM`` to end the
    run early (policy decisions live in the caller).  Workloads still in
    flight at the deadline are discarded unrecorded, and a failed cloud
    parks its slots instead of spawning launch-failure records.
    """
    if concurrency < 1:
        raise ConfigError("concurrency must be at least 1")
    timing = timing or TimingParams()
    t0 = cloud.clock
    if until < t0:
        raise ConfigError("stream deadline precedes the cloud clock")

    results: list[WorkloadResult] = []
    heap: list[tuple[float, int, int, str, object]] = []
    seq = itertools.count()
    PRIO_WORK, PRIO_TICK, PRIO_HOUR = 0, 1, 2

    gate_count = 0

    def push(t: float, prio: int, kind: str, payload: object) -> None:
        heapq.heappush(heap, (t, prio, next(seq), kind, payload))

    for slot in range(concurrency):
        t_launch = t0 + slot * launch_stagger
        if t_launch < until:
            push(t_launch, PRIO_WORK, "launch", slot)
    if tick_seconds:
        k = 0
        while (t := t0 + k * tick_seconds) < until:
            push(t, PRIO_TICK, "tick", None)
            k += 1
    if hour_hook is not None:
        k = 1
        while (t := t0 + k * hour_seconds) < until:
            push(t, PRIO_HOUR, "hour", None)
            k += 1

    def record(result: WorkloadResult) -> None:
        if collect:
            results.append(result)
        if result_hook is not None:
            result_hook(result)

    def advance(execution: _Execution, t: float) -> None:
        nonlocal gate_count
        ambient = gate_count - (1 if execution.holds_gate() else 0)
        duration, event, finished = execution.run_one(ambient)
        gate_count = ambient + (1 if execution.holds_gate() else 0)
        if event is not None and error_hook is not None:
            error_hook(t, *event)
        check_failed(cloud)
        push(t + duration, PRIO_WORK, "finish" if finished else "step", execution)

    stopped = False
    while heap and not stopped:
        t, _prio, _seq, kind, payload = heapq.heappop(heap)
        if t >= until:
            break
        cloud.clock = t
        if kind == "launch":
            if not cloud.failed:
                advance(_Execution(defn, cloud, faults, timing, t, payload), t)
        elif kind == "step":
            execution = payload
            if cloud.failed:
                gate_count -= 1 if execution.holds_gate() else 0
                fresh_error = execution.error is None
                execution.abort_unavailable()
                if fresh_error and error_hook is not None:
                    error_hook(t, execution.failed_step, execution.error, False)
                record(execution.finalize(t))
            else:
                advance(execution, t)
        elif kind == "finish":
            execution = payload
            gate_count -= 1 if execution.holds_gate() else 0
            record(execution.finalize(t))
            if not cloud.failed:
                push(t, PRIO_WORK, "launch", execution.slot)
        elif kind == "tick":
            gauges = apply_resource_effects(cloud, IntervalElapsed(tick_seconds))
            if tick_hook is not None:
                tick_hook(t, gauges)
        else:  # hour
            if hour_hook(t) is STOP_STREAM:
                stopped = True
    cloud.clock = cloud.clock if stopped else until
    return results
