"""Versioned in-memory fleet state: keyed tables, atomic publication, deltas.

One writer (the update manager) publishes immutable snapshots; any number of
readers hold snapshot references for as long as they like. Tables keep rows
in sorted-name order with a shared name->row index, so lookups cost one dict
probe regardless of fleet size, and untouched rows are carried across
publishes by reference.
"""

from __future__ import annotations

import threading
from typing import Iterator, NamedTuple

import numpy as np

from .model import (
    STATE_ORDER,
    Alert,
    AppearanceState,
    EntityId,
    EntityKind,
    JobRecord,
    NodeColumns,
    NodeRecord,
    SensorColumns,
    SensorRecord,
    SystemAnalytics,
    empty_analytics,
)

DEFAULT_DELTA_RETENTION = 64


class OutOfOrderBatchError(ValueError):
    """A publish carried a batch_id at or below the last applied one."""


class InvalidCursorError(ValueError):
    """A delta cursor points past the current version."""


class StoreNotEmptyError(RuntimeError):
    """Startup load attempted on a store that already has state."""


class NodeBundle(NamedTuple):
    record: NodeRecord
    appearance: AppearanceState
    alerts: tuple[Alert, ...]


class NodeTable:
    """Immutable keyed table of node state.

    names is sorted; records and appearance_codes align with it; columns
    mirrors the records field-by-field for vectorized work. Lookup goes
    through by_name (name -> record, one probe, no row indirection) plus two
    sparse overlays: abnormal (appearance codes for non-OK nodes only) and
    alerts. Keeping the hot path to a single large-dict probe is what holds
    lookup latency flat as the fleet grows.
    """

    __slots__ = (
        "names",
        "index",
        "records",
        "by_name",
        "appearance_codes",
        "abnormal",
        "alerts",
        "columns",
    )

    def __init__(
        self,
        names: tuple[str, ...],
        index: dict[str, int],
        records: tuple[NodeRecord, ...],
        appearance_codes: np.ndarray,
        alerts: dict[str, tuple[Alert, ...]],
        columns: NodeColumns,
        by_name: dict[str, NodeRecord] | None = None,
        abnormal: dict[str, int] | None = None,
    ) -> None:
        self.names = names
        self.index = index
        self.records = records
        self.appearance_codes = appearance_codes
        self.alerts = alerts
        self.columns = columns
        # Lookup structures are built on first use so update cycles never pay
        # for them; the build is idempotent, so a racing first-read is benign.
        self.by_name = by_name
        self.abnormal = abnormal

    @classmethod
    def empty(cls) -> "NodeTable":
        return cls((), {}, (), np.empty(0, np.int8), {}, NodeColumns.empty())

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        rows = self.by_name
        if rows is None:
            rows = self._build_rows()
        return name in rows

    def _build_rows(self) -> dict[str, NodeRecord]:
        rows = dict(zip(self.names, self.records))
        self.by_name = rows
        return rows

    def _build_abnormal(self) -> dict[str, int]:
        hot = np.nonzero(self.appearance_codes)[0]
        overlay = {self.names[i]: int(self.appearance_codes[i]) for i in hot.tolist()}
        self.abnormal = overlay
        return overlay

    def bundle_at(self, i: int) -> NodeBundle:
        name = self.names[i]
        return NodeBundle(
            self.records[i],
            STATE_ORDER[self.appearance_codes[i]],
            self.alerts.get(name, ()),
        )

    def get(self, name: str) -> NodeBundle | None:
        rows = self.by_name
        if rows is None:
            rows = self._build_rows()
        record = rows.get(name)
        if record is None:
            return None
        overlay = self.abnormal
        if overlay is None:
            overlay = self._build_abnormal()
        return NodeBundle(
            record,
            STATE_ORDER[overlay.get(name, 0)],
            self.alerts.get(name, ()),
        )

    def iter_bundles(self) -> Iterator[tuple[str, NodeBundle]]:
        for i, name in enumerate(self.names):
            yield name, self.bundle_at(i)


class SensorTable:
    """Immutable keyed table of the latest sensor records."""

    __slots__ = ("names", "index", "records", "columns")

    def __init__(
        self,
        names: tuple[str, ...],
        index: dict[str, int],
        records: tuple[SensorRecord, ...],
        columns: SensorColumns,
    ) -> None:
        self.names = names
        self.index = index
        self.records = records
        self.columns = columns

    @classmethod
    def empty(cls) -> "SensorTable":
        return cls((), {}, (), SensorColumns.empty())

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self.index

    def get(self, name: str) -> SensorRecord | None:
        i = self.index.get(name)
        if i is None:
            return None
        return self.records[i]


class FleetSnapshot:
    """One immutable, versioned view of the whole fleet plus derived state."""

    __slots__ = ("version", "batch_id", "produced_at", "nodes", "sensors", "jobs", "analytics")

    def __init__(
        self,
        version: int,
        batch_id: int,
        produced_at: int,
        nodes: NodeTable,
        sensors: SensorTable,
        jobs: dict[str, JobRecord],
        analytics: SystemAnalytics,
    ) -> None:
        self.version = version
        self.batch_id = batch_id
        self.produced_at = produced_at
        self.nodes = nodes
        self.sensors = sensors
        self.jobs = jobs
        self.analytics = analytics

    def lookup(self, entity: EntityId) -> NodeBundle | SensorRecord | None:
        """Constant-time keyed lookup; None means not-found (not an error)."""
        if entity.kind is EntityKind.NODE:
            return self.nodes.get(entity.name)
        return self.sensors.get(entity.name)

    def __repr__(self) -> str:
        return (
            f"FleetSnapshot(v{self.version}, batch={self.batch_id}, "
            f"nodes={len(self.nodes)}, sensors={len(self.sensors)}, jobs={len(self.jobs)})"
        )


def empty_snapshot() -> FleetSnapshot:
    return FleetSnapshot(0, 0, 0, NodeTable.empty(), SensorTable.empty(), {}, empty_analytics())


class ChangeSet(NamedTuple):
    """Entity names whose published state differs from the previous version."""

    nodes: tuple[str, ...]
    sensors: tuple[str, ...]
    jobs_changed: tuple[str, ...]
    jobs_removed: tuple[str, ...]

    def total(self) -> int:
        return len(self.nodes) + len(self.sensors) + len(self.jobs_changed) + len(self.jobs_removed)


EMPTY_CHANGES = ChangeSet((), (), (), ())


class DeltaResult(NamedTuple):
    """Merged changes in (since, version], served against `snapshot`.

    full_resync=True means the cursor predates retained history and the
    client must refetch the whole snapshot instead.
    """

    since: int
    version: int
    full_resync: bool
    changes: ChangeSet
    snapshot: FleetSnapshot


class StateStore:
    """Single-writer, many-reader holder of the current snapshot.

    Publication swaps one reference under a lock and never blocks readers;
    a reader either sees the old snapshot or the new one, never a mixture.
    A bounded history of (version, changes, snapshot) supports delta queries
    and the per-version stream.
    """

    def __init__(self, delta_retention: int = DEFAULT_DELTA_RETENTION) -> None:
        if delta_retention < 1:
            raise ValueError("delta_retention must be >= 1")
        self._retention = delta_retention
        self._current = empty_snapshot()
        self._history: list[tuple[int, ChangeSet, FleetSnapshot]] = []
        self._writer_lock = threading.RLock()
        self._publish_cond = threading.Condition()

    def current(self) -> FleetSnapshot:
        return self._current

    @property
    def version(self) -> int:
        return self._current.version

    def writer(self) -> threading.RLock:
        """Lock serializing update cycles (the single-writer contract)."""
        return self._writer_lock

    def publish(
        self,
        *,
        batch_id: int,
        produced_at: int,
        nodes: NodeTable,
        sensors: SensorTable,
        jobs: dict[str, JobRecord],
        analytics: SystemAnalytics,
        changes: ChangeSet,
    ) -> FleetSnapshot:
        """Atomically publish the next snapshot (version + 1).

        Raises OutOfOrderBatchError when batch_id does not advance.
        """
        with self._writer_lock:
            previous = self._current
            if batch_id <= previous.batch_id:
                raise OutOfOrderBatchError(
                    f"batch {batch_id} not after last applied batch {previous.batch_id}"
                )
            snapshot = FleetSnapshot(
                previous.version + 1, batch_id, produced_at, nodes, sensors, jobs, analytics
            )
            self._history.append((snapshot.version, changes, snapshot))
            if len(self._history) > self._retention:
                del self._history[0]
            self._current = snapshot
        with self._publish_cond:
            self._publish_cond.notify_all()
        return snapshot

    def wait_for_version(self, min_version: int, timeout: float | None = None) -> int:
        """Block until the current version reaches min_version (or timeout);
        returns the current version either way."""
        with self._publish_cond:
            self._publish_cond.wait_for(lambda: self._current.version >= min_version, timeout)
            return self._current.version

    def changes_at(self, version: int) -> tuple[ChangeSet, FleetSnapshot] | None:
        """The change set and snapshot for one retained version, else None."""
        history = self._history
        if not history:
            return None
        first_version = history[0][0]
        i = version - first_version
        if i < 0 or i >= len(history):
            return None
        _, changes, snapshot = history[i]
        return changes, snapshot

    def delta(self, since: int) -> DeltaResult:
        """Everything that changed in versions (since, current].

        Raises InvalidCursorError if since is in the future. Returns a
        full-resync marker when since predates retained history.
        """
        current = self._current
        history = self._history
        if since > current.version:
            raise InvalidCursorError(f"cursor {since} is past current version {current.version}")
        if since == current.version:
            return DeltaResult(since, current.version, False, EMPTY_CHANGES, current)
        first_retained = history[0][0] if history else current.version + 1
        if since + 1 < first_retained:
            return DeltaResult(since, current.version, True, EMPTY_CHANGES, current)
        nodes: set[str] = set()
        sensors: set[str] = set()
        jobs_changed: set[str] = set()
        jobs_removed: set[str] = set()
        for version, changes, _ in history:
            if version <= since:
                continue
            nodes.update(changes.nodes)
            sensors.update(changes.sensors)
            for job_id in changes.jobs_changed:
                jobs_removed.discard(job_id)
                jobs_changed.add(job_id)
            for job_id in changes.jobs_removed:
                jobs_changed.discard(job_id)
                jobs_removed.add(job_id)
        merged = ChangeSet(
            tuple(sorted(nodes)),
            tuple(sorted(sensors)),
            tuple(sorted(jobs_changed)),
            tuple(sorted(jobs_removed)),
        )
        return DeltaResult(since, current.version, False, merged, current)
