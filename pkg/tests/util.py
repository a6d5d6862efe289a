"""Shared helpers: batch builders, snapshot materialization, diff oracle."""

from __future__ import annotations

import random

from fleetmon.alerts import compute_analytics, evaluate_thresholds
from fleetmon.ingest import UpdateBatch
from fleetmon.model import (
    EntityId,
    EntityKind,
    SensorKind,
    SensorRecord,
    derive_appearance,
)
from fleetmon.store import FleetSnapshot


def make_batch(batch_id, produced_at, nodes=(), sensors=(), jobs=None) -> UpdateBatch:
    return UpdateBatch(
        batch_id,
        produced_at,
        tuple(nodes),
        tuple(sensors),
        None if jobs is None else tuple(jobs),
    )


def make_sensor(name="pod-temp-0001", zone="zone0", kind=SensorKind.TEMPERATURE_C,
                timestamp=1_700_000_000, value=22.5) -> SensorRecord:
    return SensorRecord(EntityId(name, EntityKind.SENSOR), zone, kind, timestamp, value)


def snapshot_state(snap: FleetSnapshot):
    """Materialized value view of a snapshot, for equality comparison."""
    return (
        dict(snap.nodes.iter_bundles()),
        {name: snap.sensors.get(name) for name in snap.sensors.names},
        dict(snap.jobs),
        snap.analytics,
    )


def diff_snapshots(old: FleetSnapshot, new: FleetSnapshot):
    """Set-difference oracle between two full snapshots."""
    old_nodes = dict(old.nodes.iter_bundles())
    new_nodes = dict(new.nodes.iter_bundles())
    nodes = {
        name
        for name in old_nodes.keys() | new_nodes.keys()
        if old_nodes.get(name) != new_nodes.get(name)
    }
    old_sensors = {name: old.sensors.get(name) for name in old.sensors.names}
    new_sensors = {name: new.sensors.get(name) for name in new.sensors.names}
    sensors = {
        name
        for name in old_sensors.keys() | new_sensors.keys()
        if old_sensors.get(name) != new_sensors.get(name)
    }
    jobs_changed = {jid for jid, job in new.jobs.items() if old.jobs.get(jid) != job}
    jobs_removed = {jid for jid in old.jobs if jid not in new.jobs}
    return nodes, sensors, jobs_changed, jobs_removed


def rebuild_oracle(prev: FleetSnapshot, batch: UpdateBatch, rules, window: int):
    """Naive from-scratch construction of the post-cycle state."""
    now = batch.produced_at
    touched_nodes = {r.id.name: r for r in batch.node_records}
    nodes = {}
    for name in sorted(set(prev.nodes.names) | set(touched_nodes)):
        if name in touched_nodes:
            rec = touched_nodes[name]
            alerts = tuple(evaluate_thresholds(rec, rules, now, window))
            state = derive_appearance(rec, alerts, now, window)
            nodes[name] = (rec, state, alerts)
        else:
            bundle = prev.nodes.get(name)
            nodes[name] = (bundle.record, bundle.appearance, bundle.alerts)
    touched_sensors = {r.id.name: r for r in batch.sensor_records}
    sensors = {}
    for name in set(prev.sensors.names) | set(touched_sensors):
        sensors[name] = touched_sensors.get(name) or prev.sensors.get(name)
    if batch.job_records is None:
        jobs = dict(prev.jobs)
    else:
        jobs = {j.job_id: j for j in batch.job_records}
    analytics = compute_analytics(nodes.values(), jobs)
    return nodes, sensors, jobs, analytics


def subset_batch(rng: random.Random, full: UpdateBatch, *, keep_jobs=False) -> UpdateBatch:
    """A random partial batch drawn from a full one (same id and clock)."""
    nodes = [r for r in full.node_records if rng.random() < 0.4]
    sensors = [r for r in full.sensor_records if rng.random() < 0.4]
    jobs = full.job_records if keep_jobs else None
    return make_batch(full.batch_id, full.produced_at, nodes, sensors, jobs)
