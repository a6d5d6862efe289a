"""Synthetic fleet generator: a desk-scale stand-in for a production feed.

Generates a heterogeneous node fleet plus pod sensors, then drifts every
metric with a bounded random walk per tick. Fully deterministic in
(seed, config, tick index). Batches carry both record tuples and prebuilt
column arrays, and entity names are emitted in sorted order so the update
manager's aligned fast path engages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from . import ingest
from .ingest import UpdateBatch
from .model import (
    ARCH_CODE,
    ARCH_ORDER,
    KIND_ORDER,
    STATUS_DOWN,
    STATUS_UP,
    ArchClass,
    EntityId,
    EntityKind,
    JobRecord,
    NodeColumns,
    NodeRecord,
    NodeStatus,
    SensorColumns,
    SensorKind,
    SensorRecord,
)

DEFAULT_ARCH_MIX: dict[ArchClass, float] = {
    ArchClass.AMD: 0.2,
    ArchClass.INTEL: 0.2,
    ArchClass.KNL: 0.5,
    ArchClass.GPU: 0.1,
}

DEFAULT_CORES_PER_ARCH: dict[ArchClass, int] = {
    ArchClass.AMD: 32,
    ArchClass.INTEL: 32,
    ArchClass.KNL: 64,
    ArchClass.GPU: 40,
}

_KIND_TAG = {
    SensorKind.TEMPERATURE_C: "temp",
    SensorKind.HUMIDITY_PCT: "hum",
    SensorKind.AIRFLOW_CFM: "air",
    SensorKind.POWER_KW: "pow",
}

# (initial center, initial spread, walk step) per sensor kind
_KIND_PROFILE = {
    SensorKind.TEMPERATURE_C: (22.0, 3.0, 0.5),
    SensorKind.HUMIDITY_PCT: (45.0, 10.0, 1.0),
    SensorKind.AIRFLOW_CFM: (1200.0, 200.0, 20.0),
    SensorKind.POWER_KW: (5.0, 2.0, 0.2),
}

_ZONE_COUNT = 8


@dataclass(frozen=True)
class FleetConfig:
    node_count: int = 1000
    sensor_count: int = 5000
    arch_mix: Mapping[ArchClass, float] = field(default_factory=lambda: dict(DEFAULT_ARCH_MIX))
    scale_factor: float = 1.0
    seed: int = 7
    fault_rate: float = 0.01
    cores_per_arch: Mapping[ArchClass, int] = field(
        default_factory=lambda: dict(DEFAULT_CORES_PER_ARCH)
    )
    tick_period_s: int = 5
    base_timestamp: int = 1_700_000_000
    cpu_step: float = 0.05
    mem_step: float = 2.0
    disk_step: float = 5.0
    jobs_step: int = 1
    cores_step: int = 4
    sensor_step_scale: float = 1.0
    # Walks revert toward each node's baseline so the fleet's load profile is
    # stationary instead of diffusing into the clamps over long runs.
    reversion: float = 0.1
    recovery_rate: float = 0.2
    job_count: int | None = None
    job_churn: float = 0.05

    def __post_init__(self) -> None:
        if abs(sum(self.arch_mix.values()) - 1.0) > 1e-9:
            raise ValueError("arch_mix must sum to 1")
        if self.effective_node_count < 1:
            raise ValueError("node_count * scale_factor must be >= 1")
        if not 0.0 <= self.fault_rate <= 1.0:
            raise ValueError("fault_rate must be in [0, 1]")

    @property
    def effective_node_count(self) -> int:
        return int(round(self.node_count * self.scale_factor))


def arch_allocation(mix: Mapping[ArchClass, float], n: int) -> dict[ArchClass, int]:
    """Largest-remainder apportionment of n nodes over the mix, ties broken
    in architecture declaration order."""
    quotas = [n * mix.get(arch, 0.0) for arch in ARCH_ORDER]
    floors = [math.floor(q) for q in quotas]
    remaining = n - sum(floors)
    by_remainder = sorted(range(len(ARCH_ORDER)), key=lambda i: (-(quotas[i] - floors[i]), i))
    for i in by_remainder[:remaining]:
        floors[i] += 1
    return {arch: floors[i] for i, arch in enumerate(ARCH_ORDER)}


class FleetSimulator:
    """Stateful generator: one startup batch, then drifted batches per tick."""

    def __init__(self, config: FleetConfig) -> None:
        self.config = config
        self._rng = np.random.default_rng(config.seed)
        n = config.effective_node_count
        width = max(4, len(str(n - 1)))
        self._names = tuple(f"n{i:0{width}d}" for i in range(n))
        self._ids = tuple(EntityId(name, EntityKind.NODE) for name in self._names)

        counts = arch_allocation(config.arch_mix, n)
        arch_codes = []
        for arch in ARCH_ORDER:
            arch_codes.extend([ARCH_CODE[arch]] * counts[arch])
        self._arch = np.array(arch_codes, np.int8)
        self._arch_enums = tuple(ARCH_ORDER[c] for c in arch_codes)
        cores = np.array([config.cores_per_arch[ARCH_ORDER[c]] for c in arch_codes], np.int64)
        self._cores_total = cores

        rng = self._rng
        self._cpu = np.round(rng.uniform(0.05, 0.90, n), 2)
        self._mem = np.round(rng.uniform(16.0, 120.0, n), 2)
        self._disk = np.round(rng.uniform(100.0, 900.0, n), 2)
        self._cpu_base = self._cpu.copy()
        self._mem_base = self._mem.copy()
        self._disk_base = self._disk.copy()
        self._jobs = rng.integers(0, 5, n)
        self._busy = np.minimum((cores * rng.uniform(0.2, 0.9, n)).astype(np.int64), cores)
        self._status = np.zeros(n, np.int8)

        self._init_sensors()
        self._init_jobs()
        self._tick_index = 0
        self._batch_seq = 0
        self._started = False

    def _init_sensors(self) -> None:
        cfg = self.config
        m = cfg.sensor_count
        width = max(4, len(str(m - 1))) if m else 4
        meta = []
        for i in range(m):
            kind = KIND_ORDER[i % len(KIND_ORDER)]
            meta.append((f"pod-{_KIND_TAG[kind]}-{i:0{width}d}", f"zone{i % _ZONE_COUNT}", kind))
        meta.sort()  # sorted emission keeps the store's aligned fast path hot
        self._sensor_names = tuple(name for name, _, _ in meta)
        self._sensor_ids = tuple(EntityId(name, EntityKind.SENSOR) for name in self._sensor_names)
        self._sensor_zones = tuple(zone for _, zone, _ in meta)
        self._sensor_kinds = tuple(kind for _, _, kind in meta)
        self._sensor_kind_codes = np.array(
            [KIND_ORDER.index(k) for k in self._sensor_kinds], np.int8
        )
        centers = np.array([_KIND_PROFILE[k][0] for k in self._sensor_kinds])
        spreads = np.array([_KIND_PROFILE[k][1] for k in self._sensor_kinds])
        self._sensor_steps = np.array([_KIND_PROFILE[k][2] for k in self._sensor_kinds])
        values = centers + self._rng.uniform(-1.0, 1.0, m) * spreads
        self._sensor_values = np.round(self._clamp_sensor_values(values), 2)

    def _clamp_sensor_values(self, values: np.ndarray) -> np.ndarray:
        hum = self._sensor_kind_codes == KIND_ORDER.index(SensorKind.HUMIDITY_PCT)
        nonneg = np.isin(
            self._sensor_kind_codes,
            [KIND_ORDER.index(SensorKind.AIRFLOW_CFM), KIND_ORDER.index(SensorKind.POWER_KW)],
        )
        values = np.where(hum, np.clip(values, 0.0, 100.0), values)
        return np.where(nonneg, np.maximum(values, 0.0), values)

    def _init_jobs(self) -> None:
        cfg = self.config
        count = cfg.job_count if cfg.job_count is not None else max(1, cfg.effective_node_count // 4)
        self._job_seq = 0
        self._jobs_table: list[JobRecord] = [self._new_job() for _ in range(count)]

    def _new_job(self) -> JobRecord:
        rng = self._rng
        job_id = f"j{self._job_seq:05d}"
        self._job_seq += 1
        user = f"u{int(rng.integers(0, 16)):02d}"
        queue = ARCH_ORDER[int(rng.integers(0, len(ARCH_ORDER)))]
        span = int(rng.integers(1, min(4, len(self._names)) + 1))
        picks = sorted(int(i) for i in rng.choice(len(self._names), size=span, replace=False))
        slots = int(rng.choice([64, 128, 256, 512, 1024, 2048, 4096, 8192]))
        return JobRecord(job_id, user, queue, max(slots, span), tuple(self._names[i] for i in picks))

    # --- batch assembly ---

    def _node_columns(self, timestamp: int) -> NodeColumns:
        return NodeColumns(
            names=self._names,
            arch=self._arch,
            timestamp=np.full(len(self._names), timestamp, np.int64),
            cpu_load=self._cpu.copy(),
            mem_free_gb=self._mem.copy(),
            disk_free_gb=self._disk.copy(),
            jobs_running=self._jobs.copy(),
            cores_busy=self._busy.copy(),
            cores_total=self._cores_total,
            status=self._status.copy(),
        )

    def _node_records(self, cols: NodeColumns) -> tuple[NodeRecord, ...]:
        ts = int(cols.timestamp[0]) if len(cols.names) else 0
        return tuple(
            NodeRecord(eid, arch, ts, cpu, mem, disk, jobs, busy, total, _STATUS_ENUM[st])
            for eid, arch, cpu, mem, disk, jobs, busy, total, st in zip(
                self._ids,
                self._arch_enums,
                cols.cpu_load.tolist(),
                cols.mem_free_gb.tolist(),
                cols.disk_free_gb.tolist(),
                cols.jobs_running.tolist(),
                cols.cores_busy.tolist(),
                cols.cores_total.tolist(),
                cols.status.tolist(),
            )
        )

    def _sensor_columns(self, timestamp: int) -> SensorColumns:
        return SensorColumns(
            names=self._sensor_names,
            zones=self._sensor_zones,
            kind=self._sensor_kind_codes,
            timestamp=np.full(len(self._sensor_names), timestamp, np.int64),
            value=self._sensor_values.copy(),
        )

    def _sensor_records(self, cols: SensorColumns) -> tuple[SensorRecord, ...]:
        ts = int(cols.timestamp[0]) if len(cols.names) else 0
        return tuple(
            SensorRecord(eid, zone, kind, ts, value)
            for eid, zone, kind, value in zip(
                self._sensor_ids, self._sensor_zones, self._sensor_kinds, cols.value.tolist()
            )
        )

    def _build_batch(self, include_jobs: bool) -> UpdateBatch:
        self._batch_seq += 1
        produced_at = self.config.base_timestamp + self._tick_index * self.config.tick_period_s
        node_cols = self._node_columns(produced_at)
        sensor_cols = self._sensor_columns(produced_at)
        return UpdateBatch(
            batch_id=self._batch_seq,
            produced_at=produced_at,
            node_records=self._node_records(node_cols),
            sensor_records=self._sensor_records(sensor_cols),
            job_records=tuple(self._jobs_table) if include_jobs else None,
            node_columns=node_cols,
            sensor_columns=sensor_cols,
        )

    def generate_fleet(self) -> UpdateBatch:
        """The full startup snapshot (batch 1). Call once per simulator."""
        if self._started:
            raise RuntimeError("generate_fleet already called; use tick()")
        self._started = True
        return self._build_batch(include_jobs=True)

    def tick(self) -> UpdateBatch:
        """Advance every metric one random-walk step and emit the full fleet."""
        if not self._started:
            raise RuntimeError("call generate_fleet() before tick()")
        cfg = self.config
        rng = self._rng
        n = len(self._names)
        self._tick_index += 1

        if cfg.cpu_step:
            drift = rng.uniform(-1.0, 1.0, n) * cfg.cpu_step
            pull = cfg.reversion * (self._cpu_base - self._cpu)
            self._cpu = np.round(np.clip(self._cpu + drift + pull, 0.0, 1.5), 2)
        if cfg.mem_step:
            drift = rng.uniform(-1.0, 1.0, n) * cfg.mem_step
            pull = cfg.reversion * (self._mem_base - self._mem)
            self._mem = np.round(np.maximum(self._mem + drift + pull, 0.0), 2)
        if cfg.disk_step:
            drift = rng.uniform(-1.0, 1.0, n) * cfg.disk_step
            pull = cfg.reversion * (self._disk_base - self._disk)
            self._disk = np.round(np.maximum(self._disk + drift + pull, 0.0), 2)
        if cfg.jobs_step:
            self._jobs = np.clip(
                self._jobs + rng.integers(-cfg.jobs_step, cfg.jobs_step + 1, n), 0, 64
            )
        if cfg.cores_step:
            self._busy = np.clip(
                self._busy + rng.integers(-cfg.cores_step, cfg.cores_step + 1, n),
                0,
                self._cores_total,
            )
        if cfg.fault_rate:
            draws = rng.random(n)
            up = self._status == STATUS_UP
            fail = up & (draws < cfg.fault_rate)
            recover = ~up & (draws < cfg.recovery_rate)
            self._status = np.where(fail | recover, 1 - self._status, self._status).astype(np.int8)
        down = self._status == STATUS_DOWN
        self._jobs = np.where(down, 0, self._jobs)
        self._busy = np.where(down, 0, self._busy)

        m = len(self._sensor_names)
        if m and cfg.sensor_step_scale:
            drift = rng.uniform(-1.0, 1.0, m) * self._sensor_steps * cfg.sensor_step_scale
            self._sensor_values = np.round(
                self._clamp_sensor_values(self._sensor_values + drift), 2
            )

        jobs_changed = False
        if self._jobs_table and cfg.job_churn and rng.random() < cfg.job_churn:
            victim = int(rng.integers(0, len(self._jobs_table)))
            self._jobs_table[victim] = self._new_job()
            jobs_changed = True
        return self._build_batch(include_jobs=jobs_changed)

    def write_cycle(self, directory: str | Path, batch: UpdateBatch) -> str:
        """Drop one batch into a feed directory; returns the cycle token."""
        token = f"{batch.batch_id:06d}"
        ingest.write_feed_cycle(
            directory, token, batch.node_records, batch.sensor_records, batch.job_records
        )
        return token


_STATUS_ENUM = {STATUS_UP: NodeStatus.UP, STATUS_DOWN: NodeStatus.DOWN}


def generate_fleet(config: FleetConfig) -> UpdateBatch:
    """One-shot startup snapshot for the given config."""
    return FleetSimulator(config).generate_fleet()
