"""Domain vocabulary shared by every pipeline stage.

Entities, telemetry records, alert rules, the derived appearance state that
drives console coloring, and fleet-wide analytics. All types are immutable
value objects; they can be shared across threads freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, NamedTuple

import numpy as np


class EntityKind(Enum):
    NODE = "NODE"
    SENSOR = "SENSOR"


class ArchClass(Enum):
    """The four compute architectures in the fleet. Closed set.

    The enum value is the CSV feed token; the member name is the wire token.
    """

    AMD = "AMD"
    INTEL = "Intel"
    KNL = "KNL"
    GPU = "GPU"


class NodeStatus(Enum):
    UP = "Up"
    DOWN = "Down"


class SensorKind(Enum):
    TEMPERATURE_C = "TemperatureC"
    HUMIDITY_PCT = "HumidityPct"
    AIRFLOW_CFM = "AirflowCfm"
    POWER_KW = "PowerKw"


class AlertSeverity(Enum):
    WARNING = "WARNING"
    CRITICAL = "CRITICAL"


class AlertDimension(Enum):
    CPU_LOAD = "CPU_LOAD"
    MEM_FREE = "MEM_FREE"
    DISK_FREE = "DISK_FREE"
    STALE = "STALE"


class AppearanceState(Enum):
    """Per-node display state. Ordering of the codes matters: the first three
    states mean "up and fresh" and are the only ones counted in utilization."""

    OK = "OK"
    WARNING = "WARNING"
    ALERT = "ALERT"
    DOWN = "DOWN"
    STALE = "STALE"


APPEARANCE_COLOR = {
    AppearanceState.OK: "green",
    AppearanceState.WARNING: "yellow",
    AppearanceState.ALERT: "red",
    AppearanceState.DOWN: "gray",
    AppearanceState.STALE: "blue",
}

# Stable integer codes used by the columnar tables. Appearance codes are
# ordered so that `code <= ALERT` selects exactly the up-and-fresh states.
ARCH_ORDER: tuple[ArchClass, ...] = tuple(ArchClass)
ARCH_CODE: dict[ArchClass, int] = {a: i for i, a in enumerate(ARCH_ORDER)}
STATE_ORDER: tuple[AppearanceState, ...] = tuple(AppearanceState)
STATE_CODE: dict[AppearanceState, int] = {s: i for i, s in enumerate(STATE_ORDER)}
KIND_ORDER: tuple[SensorKind, ...] = tuple(SensorKind)
KIND_CODE: dict[SensorKind, int] = {k: i for i, k in enumerate(KIND_ORDER)}
STATUS_UP, STATUS_DOWN = 0, 1


class EntityId(NamedTuple):
    name: str
    kind: EntityKind


class NodeRecord(NamedTuple):
    """One compute node's telemetry sample."""

    id: EntityId
    arch: ArchClass
    timestamp: int
    cpu_load: float
    mem_free_gb: float
    disk_free_gb: float
    jobs_running: int
    cores_busy: int
    cores_total: int
    status_reported: NodeStatus


class SensorRecord(NamedTuple):
    """One environmental (pod) sensor sample."""

    id: EntityId
    zone: str
    kind: SensorKind
    timestamp: int
    value: float


class JobRecord(NamedTuple):
    """A running job and the slots it consumes. node_ids are node names."""

    job_id: str
    user: str
    arch_queue: ArchClass
    slots: int
    node_ids: tuple[str, ...]


class AlertRule(NamedTuple):
    """Threshold rule for one (architecture, severity) pair."""

    arch: ArchClass
    cpu_load_max: float
    mem_free_min_gb: float
    disk_free_min_gb: float
    severity: AlertSeverity


class Alert(NamedTuple):
    entity: EntityId
    rule_arch: ArchClass
    dimension: AlertDimension
    severity: AlertSeverity
    observed: float
    threshold: float
    raised_at: int


@dataclass(frozen=True)
class SystemAnalytics:
    """Fleet-wide aggregates derived from one snapshot.

    state_counts sums to the node count; fleet_utilization is busy/total cores
    over up-and-fresh nodes only (0.0 for an empty fleet).
    """

    state_counts: dict[ArchClass, dict[AppearanceState, int]]
    total_jobs: int
    fleet_utilization: float
    active_alerts: dict[AlertSeverity, int]
    per_user_slots: dict[str, int] = field(default_factory=dict)

    @property
    def total_nodes(self) -> int:
        return sum(sum(by_state.values()) for by_state in self.state_counts.values())


def empty_analytics() -> SystemAnalytics:
    return SystemAnalytics(
        state_counts={a: {s: 0 for s in STATE_ORDER} for a in ARCH_ORDER},
        total_jobs=0,
        fleet_utilization=0.0,
        active_alerts={sev: 0 for sev in AlertSeverity},
        per_user_slots={},
    )


def valid_name(name: str) -> bool:
    """Entity names must be non-empty, comma-free, whitespace-free tokens."""
    if not name or "," in name:
        return False
    return not any(c.isspace() for c in name)


def derive_appearance(
    record: NodeRecord,
    alerts: Iterable[Alert],
    now: int,
    staleness_window: int,
) -> AppearanceState:
    """Map a node's record and active alerts to a display state.

    Precedence, highest first: DOWN (reported down), STALE (silent longer
    than the window), ALERT (any critical alert), WARNING (any warning
    alert), OK. Total and deterministic.
    """
    if record.status_reported is NodeStatus.DOWN:
        return AppearanceState.DOWN
    if now - record.timestamp > staleness_window:
        return AppearanceState.STALE
    worst = AppearanceState.OK
    for alert in alerts:
        if alert.severity is AlertSeverity.CRITICAL:
            return AppearanceState.ALERT
        worst = AppearanceState.WARNING
    return worst


def check_node_record(record: NodeRecord) -> str | None:
    """Return a reason string if the record violates a domain invariant."""
    if record.id.kind is not EntityKind.NODE:
        return "id kind must be NODE"
    if not valid_name(record.id.name):
        return f"invalid node name {record.id.name!r}"
    if record.cpu_load < 0:
        return "cpu_load must be >= 0"
    if record.mem_free_gb < 0:
        return "mem_free_gb must be >= 0"
    if record.disk_free_gb < 0:
        return "disk_free_gb must be >= 0"
    if record.jobs_running < 0:
        return "jobs_running must be >= 0"
    if record.cores_busy < 0:
        return "cores_busy must be >= 0"
    if record.cores_total < 1:
        return "cores_total must be >= 1"
    if record.cores_busy > record.cores_total:
        return "cores_busy exceeds cores_total"
    if record.status_reported is NodeStatus.DOWN and record.jobs_running != 0:
        return "jobs_running must be 0 on a Down node"
    return None


def check_sensor_record(record: SensorRecord) -> str | None:
    if record.id.kind is not EntityKind.SENSOR:
        return "id kind must be SENSOR"
    if not valid_name(record.id.name):
        return f"invalid sensor name {record.id.name!r}"
    if not valid_name(record.zone):
        return f"invalid zone {record.zone!r}"
    if record.kind is SensorKind.HUMIDITY_PCT and not 0.0 <= record.value <= 100.0:
        return "humidity out of [0, 100]"
    if record.kind in (SensorKind.AIRFLOW_CFM, SensorKind.POWER_KW) and record.value < 0:
        return f"{record.kind.value} value must be >= 0"
    return None


def check_job_record(record: JobRecord) -> str | None:
    if not valid_name(record.job_id):
        return f"invalid job_id {record.job_id!r}"
    if not valid_name(record.user):
        return f"invalid user {record.user!r}"
    if record.slots < 1:
        return "slots must be >= 1"
    if not record.node_ids:
        return "node_ids must be non-empty for a running job"
    if record.slots < len(record.node_ids):
        return "slots must be >= number of nodes"
    if not all(valid_name(n) for n in record.node_ids):
        return "invalid node name in node_ids"
    return None


class NodeColumns(NamedTuple):
    """Column-major view of a set of node records, aligned by row.

    Numeric fields live in numpy arrays so batch application, threshold
    evaluation and delta detection run as array kernels instead of
    per-record Python.
    """

    names: tuple[str, ...]
    arch: np.ndarray  # int8 ARCH_CODE
    timestamp: np.ndarray  # int64
    cpu_load: np.ndarray  # float64
    mem_free_gb: np.ndarray  # float64
    disk_free_gb: np.ndarray  # float64
    jobs_running: np.ndarray  # int64
    cores_busy: np.ndarray  # int64
    cores_total: np.ndarray  # int64
    status: np.ndarray  # int8, STATUS_UP/STATUS_DOWN

    @classmethod
    def from_records(cls, records: Iterable[NodeRecord]) -> "NodeColumns":
        recs = list(records)
        if not recs:
            return cls.empty()
        ids, arch, ts, cpu, mem, disk, jobs, busy, total, status = zip(*recs)
        return cls(
            names=tuple(i.name for i in ids),
            arch=np.array([ARCH_CODE[a] for a in arch], dtype=np.int8),
            timestamp=np.array(ts, dtype=np.int64),
            cpu_load=np.array(cpu, dtype=np.float64),
            mem_free_gb=np.array(mem, dtype=np.float64),
            disk_free_gb=np.array(disk, dtype=np.float64),
            jobs_running=np.array(jobs, dtype=np.int64),
            cores_busy=np.array(busy, dtype=np.int64),
            cores_total=np.array(total, dtype=np.int64),
            status=np.array(
                [STATUS_DOWN if s is NodeStatus.DOWN else STATUS_UP for s in status],
                dtype=np.int8,
            ),
        )

    @classmethod
    def empty(cls) -> "NodeColumns":
        return cls(
            names=(),
            arch=np.empty(0, np.int8),
            timestamp=np.empty(0, np.int64),
            cpu_load=np.empty(0, np.float64),
            mem_free_gb=np.empty(0, np.float64),
            disk_free_gb=np.empty(0, np.float64),
            jobs_running=np.empty(0, np.int64),
            cores_busy=np.empty(0, np.int64),
            cores_total=np.empty(0, np.int64),
            status=np.empty(0, np.int8),
        )

    def record_at(self, i: int) -> NodeRecord:
        return NodeRecord(
            id=EntityId(self.names[i], EntityKind.NODE),
            arch=ARCH_ORDER[self.arch[i]],
            timestamp=int(self.timestamp[i]),
            cpu_load=float(self.cpu_load[i]),
            mem_free_gb=float(self.mem_free_gb[i]),
            disk_free_gb=float(self.disk_free_gb[i]),
            jobs_running=int(self.jobs_running[i]),
            cores_busy=int(self.cores_busy[i]),
            cores_total=int(self.cores_total[i]),
            status_reported=NodeStatus.DOWN if self.status[i] == STATUS_DOWN else NodeStatus.UP,
        )

    def __len__(self) -> int:
        return len(self.names)


class SensorColumns(NamedTuple):
    """Column-major view of sensor records."""

    names: tuple[str, ...]
    zones: tuple[str, ...]
    kind: np.ndarray  # int8 KIND_CODE
    timestamp: np.ndarray  # int64
    value: np.ndarray  # float64

    @classmethod
    def from_records(cls, records: Iterable[SensorRecord]) -> "SensorColumns":
        recs = list(records)
        if not recs:
            return cls.empty()
        ids, zones, kinds, ts, values = zip(*recs)
        return cls(
            names=tuple(i.name for i in ids),
            zones=tuple(zones),
            kind=np.array([KIND_CODE[k] for k in kinds], dtype=np.int8),
            timestamp=np.array(ts, dtype=np.int64),
            value=np.array(values, dtype=np.float64),
        )

    @classmethod
    def empty(cls) -> "SensorColumns":
        return cls(
            names=(),
            zones=(),
            kind=np.empty(0, np.int8),
            timestamp=np.empty(0, np.int64),
            value=np.empty(0, np.float64),
        )

    def record_at(self, i: int) -> SensorRecord:
        return SensorRecord(
            id=EntityId(self.names[i], EntityKind.SENSOR),
            zone=self.zones[i],
            kind=KIND_ORDER[self.kind[i]],
            timestamp=int(self.timestamp[i]),
            value=float(self.value[i]),
        )

    def __len__(self) -> int:
        return len(self.names)
