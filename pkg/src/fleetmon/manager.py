"""The update cycle engine.

One manager applies each batch in exactly three sequential top-level phases:
(1) apply pod sensor records, (2) apply node records in one sorted pass,
deriving alerts and appearance per node as it is visited, (3) recompute the
fleet analytics. The snapshot publishes atomically afterwards.

The three legacy scheduling strategies (per-entity polling, staggered,
chunked) are implemented with identical final-state semantics so benchmarks
can contrast their cost shapes: they poll every node entity on every tick
and apply records through the scalar evaluation path.

Never parallelize phase work: defeating per-entity concurrency is the whole
design.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .alerts import DIMENSION_ORDER, SEVERITY_ORDER, RuleSet, evaluate_thresholds
from .ingest import UpdateBatch
from .model import (
    ARCH_CODE,
    ARCH_ORDER,
    STATE_CODE,
    STATE_ORDER,
    STATUS_DOWN,
    Alert,
    AlertDimension,
    AlertSeverity,
    AppearanceState,
    EntityId,
    EntityKind,
    JobRecord,
    NodeColumns,
    NodeRecord,
    SensorColumns,
    SensorRecord,
    SystemAnalytics,
    derive_appearance,
)
from .store import (
    ChangeSet,
    FleetSnapshot,
    NodeTable,
    SensorTable,
    StateStore,
    StoreNotEmptyError,
)

_N_STATES = len(STATE_ORDER)
_ALERT_CODE = STATE_CODE[AppearanceState.ALERT]
_DOWN_CODE = STATE_CODE[AppearanceState.DOWN]
_STALE_CODE = STATE_CODE[AppearanceState.STALE]
_WARNING_CODE = STATE_CODE[AppearanceState.WARNING]


class StrategyKind(Enum):
    MANAGED = "managed"
    PER_ENTITY = "perentity"
    STAGGERED = "staggered"
    CHUNKED = "chunked"


@dataclass(frozen=True)
class UpdateStrategy:
    kind: StrategyKind
    chunk_size: int | None = None

    def __post_init__(self) -> None:
        if self.kind is StrategyKind.CHUNKED:
            if self.chunk_size is None or self.chunk_size < 1:
                raise ValueError("chunked strategy needs chunk_size >= 1")
        elif self.chunk_size is not None:
            raise ValueError(f"chunk_size only applies to chunked, not {self.kind.value}")

    @property
    def label(self) -> str:
        if self.kind is StrategyKind.CHUNKED:
            return f"Chunked({self.chunk_size})"
        return {"managed": "Managed", "perentity": "PerEntity", "staggered": "Staggered"}[
            self.kind.value
        ]

    @classmethod
    def parse(cls, text: str) -> "UpdateStrategy":
        """Parse CLI spellings: managed, perentity, staggered, chunked:<size>."""
        token, _, arg = text.strip().lower().partition(":")
        if token == "chunked":
            if not arg:
                raise ValueError("chunked needs a size, e.g. chunked:256")
            return cls(StrategyKind.CHUNKED, int(arg))
        try:
            kind = StrategyKind(token)
        except ValueError:
            raise ValueError(f"unknown strategy {text!r}") from None
        return cls(kind)


MANAGED = UpdateStrategy(StrategyKind.MANAGED)
PER_ENTITY = UpdateStrategy(StrategyKind.PER_ENTITY)
STAGGERED = UpdateStrategy(StrategyKind.STAGGERED)


def chunked(chunk_size: int) -> UpdateStrategy:
    return UpdateStrategy(StrategyKind.CHUNKED, chunk_size)


@dataclass(frozen=True)
class UpdateReport:
    """Instrumentation for one cycle, emitted as one JSON object per cycle."""

    strategy: str
    batch_id: int
    version: int
    ticks_consumed: int
    top_level_invocations: int
    per_entity_callbacks: int
    phase_durations: dict[str, float]
    entities_touched: int
    rejected: bool = False

    def to_json(self) -> dict:
        return {
            "strategy": self.strategy,
            "batch_id": self.batch_id,
            "version": self.version,
            "ticks_consumed": self.ticks_consumed,
            "top_level_invocations": self.top_level_invocations,
            "per_entity_callbacks": self.per_entity_callbacks,
            "phase_durations": dict(self.phase_durations),
            "entities_touched": self.entities_touched,
            "rejected": self.rejected,
        }


@dataclass(frozen=True)
class CycleConfig:
    staleness_window_s: int = 120


# --- vectorized node-state derivation (the managed phase-2 kernel) ---


def _derive_node_state(
    cols: NodeColumns, rules: RuleSet, now: int, window: int
) -> tuple[np.ndarray, dict[str, tuple[Alert, ...]]]:
    """Array twin of evaluate_thresholds + derive_appearance over a column set.

    Must agree with the scalar pair exactly: the legacy strategies go through
    the scalar path and the cross-strategy equivalence tests compare results.
    """
    n = len(cols.names)
    down = cols.status == STATUS_DOWN
    up = ~down
    age = now - cols.timestamp
    stale = up & (age > window)
    warn_any = np.zeros(n, bool)
    crit_any = np.zeros(n, bool)
    dim_masks: dict[tuple[AlertSeverity, AlertDimension], np.ndarray] = {}
    for arch in ARCH_ORDER:
        arch_up = None
        for severity in SEVERITY_ORDER:
            rule = rules.get((arch, severity))
            if rule is None:
                continue
            if arch_up is None:
                arch_up = (cols.arch == ARCH_CODE[arch]) & up
            checks = (
                (AlertDimension.CPU_LOAD, cols.cpu_load > rule.cpu_load_max),
                (AlertDimension.MEM_FREE, cols.mem_free_gb < rule.mem_free_min_gb),
                (AlertDimension.DISK_FREE, cols.disk_free_gb < rule.disk_free_min_gb),
            )
            for dimension, violated in checks:
                mask = arch_up & violated
                key = (severity, dimension)
                if key in dim_masks:
                    dim_masks[key] |= mask
                else:
                    dim_masks[key] = mask
                if severity is AlertSeverity.WARNING:
                    warn_any |= mask
                else:
                    crit_any |= mask
    codes = np.zeros(n, np.int8)
    codes[warn_any] = _WARNING_CODE
    codes[crit_any] = _ALERT_CODE
    codes[stale] = _STALE_CODE
    codes[down] = _DOWN_CODE

    alerts: dict[str, tuple[Alert, ...]] = {}
    hot = np.nonzero(warn_any | crit_any | stale)[0]
    if len(hot):
        # Gather the violating rows into plain lists once; the assembly loop
        # then runs without per-element array indexing.
        names = cols.names
        hot_list = hot.tolist()
        hot_arch = cols.arch[hot].tolist()
        hot_stale = stale[hot].tolist()
        hot_age = age[hot].tolist()
        observed = {
            AlertDimension.CPU_LOAD: cols.cpu_load[hot].tolist(),
            AlertDimension.MEM_FREE: cols.mem_free_gb[hot].tolist(),
            AlertDimension.DISK_FREE: cols.disk_free_gb[hot].tolist(),
        }
        flags = {key: mask[hot].tolist() for key, mask in dim_masks.items()}
        window_f = float(window)
        for pos, i in enumerate(hot_list):
            name = names[i]
            arch = ARCH_ORDER[hot_arch[pos]]
            entity = EntityId(name, EntityKind.NODE)
            items = []
            for severity in SEVERITY_ORDER:
                rule = rules.get((arch, severity))
                if rule is None:
                    continue
                thresholds = (rule.cpu_load_max, rule.mem_free_min_gb, rule.disk_free_min_gb)
                for dimension, threshold in zip(DIMENSION_ORDER, thresholds):
                    flag = flags.get((severity, dimension))
                    if flag is not None and flag[pos]:
                        items.append(
                            Alert(
                                entity,
                                arch,
                                dimension,
                                severity,
                                observed[dimension][pos],
                                float(threshold),
                                now,
                            )
                        )
            if hot_stale[pos]:
                items.append(
                    Alert(
                        entity,
                        arch,
                        AlertDimension.STALE,
                        AlertSeverity.WARNING,
                        float(hot_age[pos]),
                        window_f,
                        now,
                    )
                )
            alerts[name] = tuple(items)
    return codes, alerts


def _is_strictly_sorted(names: tuple[str, ...]) -> bool:
    return all(a < b for a, b in zip(names, names[1:]))


def _apply_node_batch(
    prev: NodeTable, batch: UpdateBatch, rules: RuleSet, now: int, window: int
) -> tuple[NodeTable, int]:
    """Apply a batch's node records to the table; returns (table, visits).

    The aligned full-fleet update shares the batch's record tuple and column
    arrays outright, so per-cycle cost is dominated by the derivation kernels
    rather than per-record work.
    """
    records = batch.node_records
    if not records:
        return prev, 0
    cols = batch.node_columns
    names = cols.names
    if names is prev.names or names == prev.names:
        codes, alerts = _derive_node_state(cols, rules, now, window)
        return NodeTable(prev.names, prev.index, records, codes, alerts, cols), len(records)
    if len(prev) == 0 and _is_strictly_sorted(names):
        codes, alerts = _derive_node_state(cols, rules, now, window)
        index = {name: i for i, name in enumerate(names)}
        return NodeTable(names, index, records, codes, alerts, cols), len(records)
    return _apply_node_batch_slow(prev, records, rules, now, window)


def _apply_node_batch_slow(
    prev: NodeTable,
    records: tuple[NodeRecord, ...],
    rules: RuleSet,
    now: int,
    window: int,
) -> tuple[NodeTable, int]:
    """Partial updates, unsorted feeds, and fleets gaining new names."""
    by_name: dict[str, NodeRecord] = {}
    for rec in records:
        by_name[rec.id.name] = rec  # last writer wins within a batch
    touched = sorted(by_name)
    sub_records = [by_name[n] for n in touched]
    sub_cols = NodeColumns.from_records(sub_records)
    codes_sub, alerts_sub = _derive_node_state(sub_cols, rules, now, window)

    if all(n in prev.index for n in touched):
        names, index = prev.names, prev.index
        rec_list = list(prev.records)
        idx = np.fromiter((index[n] for n in touched), np.intp, count=len(touched))
        new_cols = NodeColumns(names, *(np.copy(a) for a in prev.columns[1:]))
        for arr, sub in zip(new_cols[1:], sub_cols[1:]):
            arr[idx] = sub
        codes = prev.appearance_codes.copy()
        codes[idx] = codes_sub
        for pos, n in enumerate(touched):
            rec_list[index[n]] = sub_records[pos]
        rec_tuple = tuple(rec_list)
    else:
        merged = sorted(set(prev.names) | set(touched))
        names = tuple(merged)
        index = {n: i for i, n in enumerate(names)}
        rec_list = []
        for n in names:
            rec = by_name.get(n)
            if rec is None:
                rec = prev.records[prev.index[n]]
            rec_list.append(rec)
        rec_tuple = tuple(rec_list)
        new_cols = NodeColumns.from_records(rec_list)
        codes = np.zeros(len(names), np.int8)
        for n in prev.names:
            codes[index[n]] = prev.appearance_codes[prev.index[n]]
        for pos, n in enumerate(touched):
            codes[index[n]] = codes_sub[pos]

    alerts = dict(prev.alerts)
    for n in touched:
        items = alerts_sub.get(n)
        if items:
            alerts[n] = items
        else:
            alerts.pop(n, None)
    return NodeTable(names, index, rec_tuple, codes, alerts, new_cols), len(touched)


def _apply_sensor_batch(prev: SensorTable, batch: UpdateBatch) -> tuple[SensorTable, int]:
    records = batch.sensor_records
    if not records:
        return prev, 0
    cols = batch.sensor_columns
    names = cols.names
    if names is prev.names or names == prev.names:
        return SensorTable(prev.names, prev.index, records, cols), len(records)
    if len(prev) == 0 and _is_strictly_sorted(names):
        index = {name: i for i, name in enumerate(names)}
        return SensorTable(names, index, records, cols), len(records)
    by_name: dict[str, SensorRecord] = {}
    for rec in records:
        by_name[rec.id.name] = rec
    touched = sorted(by_name)
    if all(n in prev.index for n in touched):
        names_t, index = prev.names, prev.index
    else:
        names_t = tuple(sorted(set(prev.names) | set(touched)))
        index = {n: i for i, n in enumerate(names_t)}
    rec_list: list[SensorRecord] = []
    for n in names_t:
        rec = by_name.get(n)
        if rec is None:
            rec = prev.records[prev.index[n]]
        rec_list.append(rec)
    return (
        SensorTable(names_t, index, tuple(rec_list), SensorColumns.from_records(rec_list)),
        len(touched),
    )


def _apply_jobs(
    prev_jobs: dict[str, JobRecord], batch: UpdateBatch
) -> tuple[dict[str, JobRecord], tuple[str, ...], tuple[str, ...]]:
    """Jobs are snapshot-replaced when a jobs file is present, else carried."""
    if batch.job_records is None:
        return prev_jobs, (), ()
    new = {job.job_id: job for job in batch.job_records}
    changed = tuple(sorted(jid for jid, job in new.items() if prev_jobs.get(jid) != job))
    removed = tuple(sorted(jid for jid in prev_jobs if jid not in new))
    return new, changed, removed


def _compute_analytics_fast(table: NodeTable, jobs: dict[str, JobRecord]) -> SystemAnalytics:
    """Vectorized phase-3 aggregation; must equal alerts.compute_analytics."""
    if len(table) == 0:
        counts = np.zeros(len(ARCH_ORDER) * _N_STATES, np.int64)
        busy = total = 0
    else:
        combo = table.columns.arch.astype(np.int64) * _N_STATES + table.appearance_codes
        counts = np.bincount(combo, minlength=len(ARCH_ORDER) * _N_STATES)
        util = table.appearance_codes <= _ALERT_CODE
        busy = int(table.columns.cores_busy[util].sum())
        total = int(table.columns.cores_total[util].sum())
    state_counts = {
        arch: {state: int(counts[a * _N_STATES + s]) for s, state in enumerate(STATE_ORDER)}
        for a, arch in enumerate(ARCH_ORDER)
    }
    alert_counts = {sev: 0 for sev in AlertSeverity}
    for items in table.alerts.values():
        for alert in items:
            alert_counts[alert.severity] += 1
    per_user: dict[str, int] = {}
    for job in jobs.values():
        per_user[job.user] = per_user.get(job.user, 0) + job.slots
    return SystemAnalytics(
        state_counts=state_counts,
        total_jobs=len(jobs),
        fleet_utilization=busy / total if total else 0.0,
        active_alerts=alert_counts,
        per_user_slots=per_user,
    )


# --- change detection (feeds delta queries and the console stream) ---


def _diff_node_tables(prev: NodeTable, new: NodeTable) -> tuple[str, ...]:
    """Names whose bundle (record, appearance or alerts) changed."""
    if new is prev:
        return ()
    if len(prev) == 0:
        return new.names
    if prev.names is new.names or prev.names == new.names:
        pc, nc = prev.columns, new.columns
        mask = (
            (pc.arch != nc.arch)
            | (pc.timestamp != nc.timestamp)
            | (pc.cpu_load != nc.cpu_load)
            | (pc.mem_free_gb != nc.mem_free_gb)
            | (pc.disk_free_gb != nc.disk_free_gb)
            | (pc.jobs_running != nc.jobs_running)
            | (pc.cores_busy != nc.cores_busy)
            | (pc.cores_total != nc.cores_total)
            | (pc.status != nc.status)
            | (prev.appearance_codes != new.appearance_codes)
        )
        if bool(mask.all()):
            return new.names
        changed = {new.names[i] for i in np.nonzero(mask)[0]}
        if prev.alerts is not new.alerts:
            for name in prev.alerts.keys() | new.alerts.keys():
                if prev.alerts.get(name) != new.alerts.get(name):
                    changed.add(name)
        return tuple(sorted(changed))
    changed = set()
    for i, name in enumerate(new.names):
        j = prev.index.get(name)
        if (
            j is None
            or new.records[i] != prev.records[j]
            or new.appearance_codes[i] != prev.appearance_codes[j]
            or new.alerts.get(name, ()) != prev.alerts.get(name, ())
        ):
            changed.add(name)
    return tuple(sorted(changed))


def _diff_sensor_tables(prev: SensorTable, new: SensorTable) -> tuple[str, ...]:
    if new is prev:
        return ()
    if len(prev) == 0:
        return new.names
    if prev.names is new.names or prev.names == new.names:
        pc, nc = prev.columns, new.columns
        mask = (pc.kind != nc.kind) | (pc.timestamp != nc.timestamp) | (pc.value != nc.value)
        if pc.zones is not nc.zones and pc.zones != nc.zones:
            zone_mask = np.fromiter(
                (a != b for a, b in zip(pc.zones, nc.zones)), bool, count=len(pc.zones)
            )
            mask = mask | zone_mask
        if bool(mask.all()):
            return new.names
        return tuple(sorted(new.names[i] for i in np.nonzero(mask)[0]))
    changed = set()
    for i, name in enumerate(new.names):
        j = prev.index.get(name)
        if j is None or new.records[i] != prev.records[j]:
            changed.add(name)
    return tuple(sorted(changed))


# --- cycles ---


def _rejected_report(strategy: UpdateStrategy, batch: UpdateBatch, version: int) -> UpdateReport:
    return UpdateReport(
        strategy=strategy.label,
        batch_id=batch.batch_id,
        version=version,
        ticks_consumed=0,
        top_level_invocations=0,
        per_entity_callbacks=0,
        phase_durations={"pod": 0.0, "nodes": 0.0, "analytics": 0.0},
        entities_touched=0,
        rejected=True,
    )


def _managed_cycle(
    store: StateStore, batch: UpdateBatch, rules: RuleSet, config: CycleConfig
) -> tuple[FleetSnapshot, UpdateReport]:
    with store.writer():
        prev = store.current()
        if batch.batch_id <= prev.batch_id:
            return prev, _rejected_report(MANAGED, batch, prev.version)
        now = batch.produced_at
        window = config.staleness_window_s
        top_level = 0

        t0 = time.perf_counter()
        sensors_new, sensor_visits = _apply_sensor_batch(prev.sensors, batch)
        top_level += 1
        t1 = time.perf_counter()
        nodes_new, node_visits = _apply_node_batch(prev.nodes, batch, rules, now, window)
        top_level += 1
        t2 = time.perf_counter()
        jobs_new, jobs_changed, jobs_removed = _apply_jobs(prev.jobs, batch)
        analytics = _compute_analytics_fast(nodes_new, jobs_new)
        top_level += 1
        t3 = time.perf_counter()

        changes = ChangeSet(
            nodes=_diff_node_tables(prev.nodes, nodes_new),
            sensors=_diff_sensor_tables(prev.sensors, sensors_new),
            jobs_changed=jobs_changed,
            jobs_removed=jobs_removed,
        )
        snapshot = store.publish(
            batch_id=batch.batch_id,
            produced_at=now,
            nodes=nodes_new,
            sensors=sensors_new,
            jobs=jobs_new,
            analytics=analytics,
            changes=changes,
        )
        report = UpdateReport(
            strategy=MANAGED.label,
            batch_id=batch.batch_id,
            version=snapshot.version,
            ticks_consumed=1,
            top_level_invocations=top_level,
            per_entity_callbacks=node_visits,
            phase_durations={"pod": t1 - t0, "nodes": t2 - t1, "analytics": t3 - t2},
            entities_touched=node_visits + sensor_visits + len(jobs_changed) + len(jobs_removed),
            rejected=False,
        )
        return snapshot, report


class _ScalarNodeWork:
    """Mutable node-table builder for the scalar (legacy) application path."""

    def __init__(self, prev: NodeTable, names: tuple[str, ...]) -> None:
        self.names = names
        if names is prev.names:
            self.index = prev.index
            self.records: list[NodeRecord | None] = list(prev.records)
            self.codes = prev.appearance_codes.tolist()
        else:
            self.index = {n: i for i, n in enumerate(names)}
            self.records = [None] * len(names)
            self.codes = [0] * len(names)
            for i, n in enumerate(prev.names):
                j = self.index[n]
                self.records[j] = prev.records[i]
                self.codes[j] = int(prev.appearance_codes[i])
        self.alerts = dict(prev.alerts)

    def apply(self, record: NodeRecord, state: AppearanceState, alerts: list[Alert]) -> None:
        i = self.index[record.id.name]
        self.records[i] = record
        self.codes[i] = STATE_CODE[state]
        if alerts:
            self.alerts[record.id.name] = tuple(alerts)
        else:
            self.alerts.pop(record.id.name, None)

    def finalize(self) -> NodeTable:
        records = tuple(self.records)
        return NodeTable(
            self.names,
            self.index,
            records,
            np.array(self.codes, np.int8),
            self.alerts,
            NodeColumns.from_records(records),
        )


def _legacy_cycle(
    store: StateStore,
    batch: UpdateBatch,
    rules: RuleSet,
    config: CycleConfig,
    strategy: UpdateStrategy,
) -> tuple[FleetSnapshot, UpdateReport]:
    with store.writer():
        prev = store.current()
        if batch.batch_id <= prev.batch_id:
            return prev, _rejected_report(strategy, batch, prev.version)
        now = batch.produced_at
        window = config.staleness_window_s

        inbox: dict[str, NodeRecord] = {}
        for rec in batch.node_records:
            inbox[rec.id.name] = rec
        apply_order = sorted(inbox)
        if all(n in prev.nodes.index for n in apply_order):
            roster = prev.nodes.names if len(prev.nodes) else tuple(apply_order)
        else:
            roster = tuple(sorted(set(prev.nodes.names) | set(apply_order)))
        work = _ScalarNodeWork(prev.nodes, roster)

        # Tick plan: which ticks carry the pod update and which node names
        # are gated open per tick. Every node polls on every tick regardless.
        if strategy.kind is StrategyKind.PER_ENTITY:
            ticks: list[tuple[bool, list[str]]] = [(True, apply_order)]
        elif strategy.kind is StrategyKind.STAGGERED:
            ticks = [(True, [])]
            if apply_order:
                ticks.append((False, apply_order))
        else:  # chunked
            size = strategy.chunk_size or 1
            ticks = [(True, [])]
            for i in range(0, len(apply_order), size):
                ticks.append((False, apply_order[i : i + size]))

        callbacks = 0
        pod_time = 0.0
        nodes_time = 0.0
        sensors_new = prev.sensors
        sensor_visits = 0
        for applies_pod, gate in ticks:
            gate_set = set(gate)
            t0 = time.perf_counter()
            for name in roster:
                callbacks += 1
                if name in gate_set:
                    rec = inbox[name]
                    alerts = evaluate_thresholds(rec, rules, now, window)
                    state = derive_appearance(rec, alerts, now, window)
                    work.apply(rec, state, alerts)
            nodes_time += time.perf_counter() - t0
            if applies_pod:
                t0 = time.perf_counter()
                sensors_new, sensor_visits = _apply_sensor_batch(prev.sensors, batch)
                pod_time += time.perf_counter() - t0

        t0 = time.perf_counter()
        nodes_new = work.finalize()
        nodes_time += time.perf_counter() - t0

        t0 = time.perf_counter()
        jobs_new, jobs_changed, jobs_removed = _apply_jobs(prev.jobs, batch)
        analytics = _compute_analytics_fast(nodes_new, jobs_new)
        analytics_time = time.perf_counter() - t0

        changes = ChangeSet(
            nodes=_diff_node_tables(prev.nodes, nodes_new),
            sensors=_diff_sensor_tables(prev.sensors, sensors_new),
            jobs_changed=jobs_changed,
            jobs_removed=jobs_removed,
        )
        snapshot = store.publish(
            batch_id=batch.batch_id,
            produced_at=now,
            nodes=nodes_new,
            sensors=sensors_new,
            jobs=jobs_new,
            analytics=analytics,
            changes=changes,
        )
        report = UpdateReport(
            strategy=strategy.label,
            batch_id=batch.batch_id,
            version=snapshot.version,
            ticks_consumed=len(ticks),
            top_level_invocations=callbacks,
            per_entity_callbacks=callbacks,
            phase_durations={"pod": pod_time, "nodes": nodes_time, "analytics": analytics_time},
            entities_touched=len(apply_order) + sensor_visits + len(jobs_changed) + len(jobs_removed),
            rejected=False,
        )
        return snapshot, report


def run_cycle(
    store: StateStore,
    batch: UpdateBatch,
    rules: RuleSet,
    config: CycleConfig,
    strategy: UpdateStrategy = MANAGED,
) -> tuple[FleetSnapshot, UpdateReport]:
    """Apply one batch under the given scheduling strategy.

    All strategies produce the identical final snapshot; they differ only in
    tick/callback accounting and cost. An out-of-order batch is rejected: the
    snapshot is unchanged and the report is flagged.
    """
    if strategy.kind is StrategyKind.MANAGED:
        return _managed_cycle(store, batch, rules, config)
    return _legacy_cycle(store, batch, rules, config, strategy)


def run_cycle_managed(
    store: StateStore, batch: UpdateBatch, rules: RuleSet, config: CycleConfig
) -> tuple[FleetSnapshot, UpdateReport]:
    return _managed_cycle(store, batch, rules, config)


def run_cycle_legacy(
    store: StateStore,
    batch: UpdateBatch,
    rules: RuleSet,
    config: CycleConfig,
    strategy: UpdateStrategy,
) -> tuple[FleetSnapshot, UpdateReport]:
    if strategy.kind is StrategyKind.MANAGED:
        raise ValueError("use run_cycle_managed for the managed strategy")
    return _legacy_cycle(store, batch, rules, config, strategy)


def startup_load(
    store: StateStore,
    batch: UpdateBatch,
    rules: RuleSet,
    config: CycleConfig,
    strategy: UpdateStrategy = MANAGED,
) -> tuple[FleetSnapshot, UpdateReport]:
    """Cold-start load of a full fleet batch into an empty store."""
    if store.current().version != 0:
        raise StoreNotEmptyError("startup_load requires an empty store (version 0)")
    return run_cycle(store, batch, rules, config, strategy)
