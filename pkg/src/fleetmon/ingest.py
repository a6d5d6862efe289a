"""CSV feed ingestion: snapshot-file parsing, serialization, directory watching.

Feeds are snapshot dumps, one row per entity. Malformed rows are isolated as
ParseIssues; only a wrong header rejects the whole file. Serialization is the
exact inverse of parsing so the simulator, the feed watcher and the tests all
agree byte-for-byte on the format.
"""

from __future__ import annotations

import logging
import re
import threading
import time
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Iterator, NamedTuple

from .model import (
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
    check_job_record,
    check_node_record,
    check_sensor_record,
)

logger = logging.getLogger(__name__)

NODE_HEADER = "timestamp,node_id,arch,cpu_load,mem_free_gb,disk_free_gb,jobs_running,cores_busy,cores_total,status"
SENSOR_HEADER = "timestamp,sensor_id,zone,kind,value"
JOB_HEADER = "job_id,user,arch_queue,slots,node_ids"

_ARCH_BY_TOKEN = {a.value: a for a in ArchClass}
_STATUS_BY_TOKEN = {s.value: s for s in NodeStatus}
_KIND_BY_TOKEN = {k.value: k for k in SensorKind}

_FEED_FILE_RE = re.compile(r"^(nodes|sensors|jobs)-(\d+)\.csv$")


class FeedFormatError(ValueError):
    """Whole-file rejection: the header does not match the expected schema."""


class ParseIssue(NamedTuple):
    line: int  # 1-based; the header is line 1
    reason: str


class UpdateBatch:
    """A timestamped set of records applied in one update cycle.

    At most one record per entity (last writer wins at parse time).
    job_records is None when the cycle carried no jobs file, meaning the
    previous job set carries forward unchanged.

    Record lists and their columnar views are two layouts of the same data;
    whichever the producer built first is kept and the other is derived
    lazily and cached.
    """

    __slots__ = (
        "batch_id",
        "produced_at",
        "job_records",
        "_node_records",
        "_sensor_records",
        "_node_columns",
        "_sensor_columns",
    )

    def __init__(
        self,
        batch_id: int,
        produced_at: int,
        node_records: tuple[NodeRecord, ...] | None = None,
        sensor_records: tuple[SensorRecord, ...] | None = None,
        job_records: tuple[JobRecord, ...] | None = None,
        *,
        node_columns: NodeColumns | None = None,
        sensor_columns: SensorColumns | None = None,
    ) -> None:
        if node_records is None and node_columns is None:
            node_records = ()
        if sensor_records is None and sensor_columns is None:
            sensor_records = ()
        self.batch_id = batch_id
        self.produced_at = produced_at
        self.job_records = job_records
        self._node_records = node_records
        self._sensor_records = sensor_records
        self._node_columns = node_columns
        self._sensor_columns = sensor_columns

    @property
    def node_records(self) -> tuple[NodeRecord, ...]:
        if self._node_records is None:
            cols = self._node_columns
            self._node_records = tuple(cols.record_at(i) for i in range(len(cols)))
        return self._node_records

    @property
    def sensor_records(self) -> tuple[SensorRecord, ...]:
        if self._sensor_records is None:
            cols = self._sensor_columns
            self._sensor_records = tuple(cols.record_at(i) for i in range(len(cols)))
        return self._sensor_records

    @property
    def node_columns(self) -> NodeColumns:
        if self._node_columns is None:
            self._node_columns = NodeColumns.from_records(self._node_records)
        return self._node_columns

    @property
    def sensor_columns(self) -> SensorColumns:
        if self._sensor_columns is None:
            self._sensor_columns = SensorColumns.from_records(self._sensor_records)
        return self._sensor_columns

    def __repr__(self) -> str:
        jobs = "carry" if self.job_records is None else len(self.job_records)
        return (
            f"UpdateBatch(id={self.batch_id}, at={self.produced_at}, "
            f"nodes={len(self.node_records)}, sensors={len(self.sensor_records)}, jobs={jobs})"
        )


def _quantize2(value: float) -> Decimal:
    return Decimal(str(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)


def format_load(value: float) -> str:
    """Loads render with exactly two fraction digits, half-up."""
    return f"{_quantize2(value):.2f}"


def format_gb(value: float) -> str:
    """Gigabytes render half-up at two fraction digits, trailing zero trimmed
    to keep at least one digit (90.0 stays "90.0", 12.345 becomes "12.35")."""
    text = f"{_quantize2(value):.2f}"
    if text.endswith("0"):
        text = text[:-1]
    return text


def _decode(content: bytes | str) -> str:
    if isinstance(content, bytes):
        try:
            return content.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FeedFormatError(f"feed is not valid UTF-8: {exc}") from exc
    return content


def _data_lines(text: str, expected_header: str) -> list[str]:
    lines = text.splitlines()
    if not lines or lines[0] != expected_header:
        got = lines[0] if lines else "<empty file>"
        raise FeedFormatError(f"header mismatch: expected {expected_header!r}, got {got!r}")
    return lines[1:]


def _parse_int(token: str) -> int:
    if token != token.strip() or token.startswith("+"):
        raise ValueError(token)
    return int(token, 10)


def _parse_float(token: str) -> float:
    if token != token.strip():
        raise ValueError(token)
    value = float(token)
    if value != value or value in (float("inf"), float("-inf")):
        raise ValueError(token)
    return value


def parse_node_csv(content: bytes | str) -> tuple[list[NodeRecord], list[ParseIssue]]:
    """Parse a node snapshot file.

    Returns the well-formed records in row order plus one issue per bad row.
    Duplicate node ids keep the last occurrence (and record an issue).
    Raises FeedFormatError if the header is wrong.
    """
    records: dict[str, NodeRecord] = {}
    issues: list[ParseIssue] = []
    for offset, line in enumerate(_data_lines(_decode(content), NODE_HEADER)):
        line_no = offset + 2
        fields = line.split(",")
        if len(fields) != 10:
            issues.append(ParseIssue(line_no, f"expected 10 fields, got {len(fields)}"))
            continue
        ts_s, name, arch_s, cpu_s, mem_s, disk_s, jobs_s, busy_s, total_s, status_s = fields
        try:
            record = NodeRecord(
                id=EntityId(name, EntityKind.NODE),
                arch=_ARCH_BY_TOKEN[arch_s],
                timestamp=_parse_int(ts_s),
                cpu_load=_parse_float(cpu_s),
                mem_free_gb=_parse_float(mem_s),
                disk_free_gb=_parse_float(disk_s),
                jobs_running=_parse_int(jobs_s),
                cores_busy=_parse_int(busy_s),
                cores_total=_parse_int(total_s),
                status_reported=_STATUS_BY_TOKEN[status_s],
            )
        except KeyError as exc:
            issues.append(ParseIssue(line_no, f"unknown token {exc.args[0]!r}"))
            continue
        except ValueError:
            issues.append(ParseIssue(line_no, "unparseable numeric field"))
            continue
        reason = check_node_record(record)
        if reason is not None:
            issues.append(ParseIssue(line_no, reason))
            continue
        if name in records:
            issues.append(ParseIssue(line_no, f"duplicate node_id {name}; keeping this row"))
            records.pop(name)
        records[name] = record
    return list(records.values()), issues


def parse_sensor_csv(content: bytes | str) -> tuple[list[SensorRecord], list[ParseIssue]]:
    """Sensor-file twin of parse_node_csv."""
    records: dict[str, SensorRecord] = {}
    issues: list[ParseIssue] = []
    for offset, line in enumerate(_data_lines(_decode(content), SENSOR_HEADER)):
        line_no = offset + 2
        fields = line.split(",")
        if len(fields) != 5:
            issues.append(ParseIssue(line_no, f"expected 5 fields, got {len(fields)}"))
            continue
        ts_s, name, zone, kind_s, value_s = fields
        try:
            record = SensorRecord(
                id=EntityId(name, EntityKind.SENSOR),
                zone=zone,
                kind=_KIND_BY_TOKEN[kind_s],
                timestamp=_parse_int(ts_s),
                value=_parse_float(value_s),
            )
        except KeyError as exc:
            issues.append(ParseIssue(line_no, f"unknown token {exc.args[0]!r}"))
            continue
        except ValueError:
            issues.append(ParseIssue(line_no, "unparseable numeric field"))
            continue
        reason = check_sensor_record(record)
        if reason is not None:
            issues.append(ParseIssue(line_no, reason))
            continue
        if name in records:
            issues.append(ParseIssue(line_no, f"duplicate sensor_id {name}; keeping this row"))
            records.pop(name)
        records[name] = record
    return list(records.values()), issues


def parse_job_csv(content: bytes | str) -> tuple[list[JobRecord], list[ParseIssue]]:
    """Job-file twin of parse_node_csv. node_ids is a ';'-separated list."""
    records: dict[str, JobRecord] = {}
    issues: list[ParseIssue] = []
    for offset, line in enumerate(_data_lines(_decode(content), JOB_HEADER)):
        line_no = offset + 2
        fields = line.split(",")
        if len(fields) != 5:
            issues.append(ParseIssue(line_no, f"expected 5 fields, got {len(fields)}"))
            continue
        job_id, user, queue_s, slots_s, nodes_s = fields
        try:
            record = JobRecord(
                job_id=job_id,
                user=user,
                arch_queue=_ARCH_BY_TOKEN[queue_s],
                slots=_parse_int(slots_s),
                node_ids=tuple(n for n in nodes_s.split(";") if n),
            )
        except KeyError as exc:
            issues.append(ParseIssue(line_no, f"unknown token {exc.args[0]!r}"))
            continue
        except ValueError:
            issues.append(ParseIssue(line_no, "unparseable numeric field"))
            continue
        reason = check_job_record(record)
        if reason is not None:
            issues.append(ParseIssue(line_no, reason))
            continue
        if job_id in records:
            issues.append(ParseIssue(line_no, f"duplicate job_id {job_id}; keeping this row"))
            records.pop(job_id)
        records[job_id] = record
    return list(records.values()), issues


def serialize_node_csv(records: list[NodeRecord] | tuple[NodeRecord, ...]) -> bytes:
    lines = [NODE_HEADER]
    for r in records:
        lines.append(
            f"{r.timestamp},{r.id.name},{r.arch.value},{format_load(r.cpu_load)},"
            f"{format_gb(r.mem_free_gb)},{format_gb(r.disk_free_gb)},"
            f"{r.jobs_running},{r.cores_busy},{r.cores_total},{r.status_reported.value}"
        )
    return ("\n".join(lines) + "\n").encode("utf-8")


def serialize_sensor_csv(records: list[SensorRecord] | tuple[SensorRecord, ...]) -> bytes:
    lines = [SENSOR_HEADER]
    for r in records:
        lines.append(f"{r.timestamp},{r.id.name},{r.zone},{r.kind.value},{r.value!r}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def serialize_job_csv(records: list[JobRecord] | tuple[JobRecord, ...]) -> bytes:
    lines = [JOB_HEADER]
    for r in records:
        lines.append(f"{r.job_id},{r.user},{r.arch_queue.value},{r.slots},{';'.join(r.node_ids)}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def feed_file_name(role: str, token: str) -> str:
    return f"{role}-{token}.csv"


class FeedWatcher:
    """Turns directory-dropped snapshot files into an ordered batch stream.

    A cycle is ready once both nodes-<token>.csv and sensors-<token>.csv
    exist (jobs-<token>.csv is optional). Cycles are consumed in
    lexicographic token order, each exactly once; emitted batch ids are
    consecutive starting at start_batch_id. A cycle whose files cannot be
    read or parsed is logged and skipped without consuming a batch id.
    """

    def __init__(
        self,
        directory: str | Path,
        poll_interval: float = 5.0,
        *,
        start_batch_id: int = 1,
        stop_event: threading.Event | None = None,
    ) -> None:
        self.directory = Path(directory)
        self.poll_interval = poll_interval
        self.stop_event = stop_event or threading.Event()
        self._next_batch_id = start_batch_id
        self._seen: set[str] = set()

    def poll_once(self) -> list[UpdateBatch]:
        """Scan the directory once and build batches for every new complete cycle."""
        by_token: dict[str, dict[str, Path]] = {}
        for path in self.directory.iterdir():
            m = _FEED_FILE_RE.match(path.name)
            if m is None:
                continue
            role, token = m.group(1), m.group(2)
            by_token.setdefault(token, {})[role] = path
        batches = []
        for token in sorted(by_token):
            if token in self._seen:
                continue
            files = by_token[token]
            if "nodes" not in files or "sensors" not in files:
                continue  # incomplete cycle; wait for the pair
            self._seen.add(token)
            batch = self._load_cycle(token, files)
            if batch is not None:
                batches.append(batch)
        return batches

    def _load_cycle(self, token: str, files: dict[str, Path]) -> UpdateBatch | None:
        try:
            nodes, node_issues = parse_node_csv(files["nodes"].read_bytes())
            sensors, sensor_issues = parse_sensor_csv(files["sensors"].read_bytes())
            jobs: tuple[JobRecord, ...] | None = None
            if "jobs" in files:
                job_list, job_issues = parse_job_csv(files["jobs"].read_bytes())
                jobs = tuple(job_list)
            else:
                job_issues = []
        except (OSError, FeedFormatError) as exc:
            logger.error("feed cycle %s skipped: %s", token, exc)
            return None
        for issue in [*node_issues, *sensor_issues, *job_issues]:
            logger.warning("feed cycle %s line %d: %s", token, issue.line, issue.reason)
        timestamps = [r.timestamp for r in nodes] + [r.timestamp for r in sensors]
        produced_at = max(timestamps) if timestamps else int(time.time())
        batch = UpdateBatch(
            batch_id=self._next_batch_id,
            produced_at=produced_at,
            node_records=tuple(nodes),
            sensor_records=tuple(sensors),
            job_records=jobs,
        )
        self._next_batch_id += 1
        return batch

    def watch(self) -> Iterator[UpdateBatch]:
        """Poll forever (until stop_event), yielding batches in cycle order."""
        while not self.stop_event.is_set():
            yield from self.poll_once()
            self.stop_event.wait(self.poll_interval)


def write_feed_cycle(
    directory: str | Path,
    token: str,
    nodes: tuple[NodeRecord, ...] | list[NodeRecord],
    sensors: tuple[SensorRecord, ...] | list[SensorRecord],
    jobs: tuple[JobRecord, ...] | list[JobRecord] | None = None,
) -> None:
    """Write one feed cycle in the exact file naming scheme the watcher consumes.

    Files land with a temporary suffix first so a concurrent watcher never
    reads a half-written cycle; the sensors file (which completes the pair)
    is renamed last.
    """
    directory = Path(directory)
    plans = [("nodes", serialize_node_csv(nodes))]
    if jobs is not None:
        plans.append(("jobs", serialize_job_csv(jobs)))
    plans.append(("sensors", serialize_sensor_csv(sensors)))
    for role, payload in plans:
        final = directory / feed_file_name(role, token)
        tmp = final.with_suffix(".tmp")
        tmp.write_bytes(payload)
        tmp.rename(final)
