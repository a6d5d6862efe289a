"""HTTP console API: snapshots, deltas, entity detail, analytics, live stream.

Read-only JSON over HTTP plus a server-push delta stream (SSE). Every request
binds to one snapshot for its whole lifetime, so responses are internally
consistent and reads never block the update cycle. Telemetry enters through
the feed watcher or the embedded simulator, never through this API.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, unquote, urlsplit

from .config import AppConfig
from .ingest import FeedWatcher
from .manager import run_cycle_managed, startup_load
from .model import (
    APPEARANCE_COLOR,
    Alert,
    JobRecord,
    NodeRecord,
    SensorRecord,
    SystemAnalytics,
)
from .simulator import FleetSimulator
from .store import ChangeSet, FleetSnapshot, InvalidCursorError, NodeBundle, StateStore

logger = logging.getLogger(__name__)

STREAM_KEEPALIVE_S = 5.0


# --- wire encoding (field names mirror the domain types, enums as uppercase tokens) ---


def record_json(r: NodeRecord) -> dict:
    return {
        "name": r.id.name,
        "arch": r.arch.name,
        "timestamp": r.timestamp,
        "cpu_load": r.cpu_load,
        "mem_free_gb": r.mem_free_gb,
        "disk_free_gb": r.disk_free_gb,
        "jobs_running": r.jobs_running,
        "cores_busy": r.cores_busy,
        "cores_total": r.cores_total,
        "status_reported": r.status_reported.name,
    }


def alert_json(a: Alert) -> dict:
    return {
        "entity": a.entity.name,
        "rule_arch": a.rule_arch.name,
        "dimension": a.dimension.name,
        "severity": a.severity.name,
        "observed": a.observed,
        "threshold": a.threshold,
        "raised_at": a.raised_at,
    }


def bundle_json(b: NodeBundle) -> dict:
    return {
        "record": record_json(b.record),
        "appearance": b.appearance.name,
        "color": APPEARANCE_COLOR[b.appearance],
        "alerts": [alert_json(a) for a in b.alerts],
    }


def sensor_json(r: SensorRecord) -> dict:
    return {
        "name": r.id.name,
        "zone": r.zone,
        "kind": r.kind.name,
        "timestamp": r.timestamp,
        "value": r.value,
    }


def job_json(j: JobRecord) -> dict:
    return {
        "job_id": j.job_id,
        "user": j.user,
        "arch_queue": j.arch_queue.name,
        "slots": j.slots,
        "node_ids": list(j.node_ids),
    }


def analytics_json(a: SystemAnalytics) -> dict:
    return {
        "state_counts": {
            arch.name: {state.name: n for state, n in by_state.items()}
            for arch, by_state in a.state_counts.items()
        },
        "total_jobs": a.total_jobs,
        "fleet_utilization": a.fleet_utilization,
        "active_alerts": {sev.name: n for sev, n in a.active_alerts.items()},
        "per_user_slots": dict(a.per_user_slots),
    }


def snapshot_json(snap: FleetSnapshot) -> dict:
    return {
        "version": snap.version,
        "batch_id": snap.batch_id,
        "produced_at": snap.produced_at,
        "nodes": {name: bundle_json(bundle) for name, bundle in snap.nodes.iter_bundles()},
        "sensors": {name: sensor_json(snap.sensors.records[i]) for i, name in enumerate(snap.sensors.names)},
        "jobs": {jid: job_json(job) for jid, job in snap.jobs.items()},
        "analytics": analytics_json(snap.analytics),
    }


def delta_json(since: int, snap: FleetSnapshot, changes: ChangeSet) -> dict:
    nodes = {}
    for name in changes.nodes:
        bundle = snap.nodes.get(name)
        if bundle is not None:
            nodes[name] = bundle_json(bundle)
    sensors = {}
    for name in changes.sensors:
        rec = snap.sensors.get(name)
        if rec is not None:
            sensors[name] = sensor_json(rec)
    return {
        "type": "delta",
        "since": since,
        "version": snap.version,
        "nodes": nodes,
        "sensors": sensors,
        "jobs": {jid: job_json(snap.jobs[jid]) for jid in changes.jobs_changed if jid in snap.jobs},
        "removed_jobs": list(changes.jobs_removed),
        "analytics": analytics_json(snap.analytics),
    }


def resync_json(since: int, version: int) -> dict:
    return {"type": "resync", "since": since, "version": version}


class ConsoleService:
    """Request dispatch against the store; transport-independent for testing."""

    def __init__(self, store: StateStore) -> None:
        self.store = store
        self.started_at = time.time()
        self.stopping = threading.Event()

    def handle(self, path: str, query: dict[str, list[str]]) -> tuple[int, dict]:
        """Route one non-stream GET; returns (status, payload)."""
        snap = self.store.current()
        if path == "/v1/health":
            return 200, {
                "status": "ok",
                "version": snap.version,
                "uptime_s": round(time.time() - self.started_at, 3),
            }
        if path == "/v1/snapshot":
            return 200, snapshot_json(snap)
        if path == "/v1/analytics":
            return 200, {"version": snap.version, "analytics": analytics_json(snap.analytics)}
        if path == "/v1/delta":
            return self._delta(query)
        if path.startswith("/v1/entity/"):
            return self.entity(unquote(path[len("/v1/entity/"):]))
        return 404, {"error": "not_found", "path": path}

    def _delta(self, query: dict[str, list[str]]) -> tuple[int, dict]:
        raw = query.get("since", [None])[0]
        if raw is None:
            return 400, {"error": "missing_since"}
        try:
            since = int(raw)
        except ValueError:
            return 400, {"error": "bad_since", "since": raw}
        try:
            result = self.store.delta(since)
        except InvalidCursorError:
            return 400, {"error": "invalid_cursor", "type": "resync", "since": since}
        if result.full_resync:
            return 200, resync_json(since, result.version)
        return 200, delta_json(since, result.snapshot, result.changes)

    def entity(self, name: str) -> tuple[int, dict]:
        """Pick-by-name: resolve against the node table, then sensors."""
        snap = self.store.current()
        bundle = snap.nodes.get(name)
        if bundle is not None:
            return 200, {"version": snap.version, "name": name, "kind": "NODE", **bundle_json(bundle)}
        rec = snap.sensors.get(name)
        if rec is not None:
            return 200, {"version": snap.version, "name": name, "kind": "SENSOR", "record": sensor_json(rec)}
        return 404, {"error": "not_found", "name": name}

    def stream_events(self, since: int | None):
        """Yield one SSE frame per published version, in order, no skips.

        A cursor older than retained history yields a resync frame and ends;
        the client refetches the snapshot and reconnects.
        """
        cursor = self.store.version if since is None else since
        yield "retry: 2000\n\n"
        while not self.stopping.is_set():
            current = self.store.wait_for_version(cursor + 1, timeout=STREAM_KEEPALIVE_S)
            if current <= cursor:
                yield ": keepalive\n\n"
                continue
            while cursor < current:
                entry = self.store.changes_at(cursor + 1)
                if entry is None:
                    payload = resync_json(cursor, current)
                    yield f"data: {json.dumps(payload)}\n\n"
                    return
                changes, snap = entry
                payload = delta_json(cursor, snap, changes)
                yield f"data: {json.dumps(payload)}\n\n"
                cursor += 1


class _Handler(BaseHTTPRequestHandler):
    server_version = "fleetmon/0.1"
    protocol_version = "HTTP/1.1"

    @property
    def service(self) -> ConsoleService:
        return self.server.service  # type: ignore[attr-defined]

    def do_GET(self) -> None:  # noqa: N802 (http.server API)
        parts = urlsplit(self.path)
        query = parse_qs(parts.query)
        if parts.path == "/v1/stream":
            self._serve_stream(query)
            return
        status, payload = self.service.handle(parts.path, query)
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _serve_stream(self, query: dict[str, list[str]]) -> None:
        raw = query.get("since", [None])[0]
        try:
            since = int(raw) if raw is not None else None
        except ValueError:
            since = None
        self.send_response(200)
        self.send_header("Content-Type", "text/event-stream")
        self.send_header("Cache-Control", "no-cache")
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Connection", "close")
        self.end_headers()
        self.close_connection = True
        try:
            for frame in self.service.stream_events(since):
                self.wfile.write(frame.encode("utf-8"))
                self.wfile.flush()
        except (BrokenPipeError, ConnectionResetError):
            pass

    def log_message(self, fmt: str, *args) -> None:
        logger.debug("%s %s", self.address_string(), fmt % args)


class ConsoleHttpServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address: tuple[str, int], service: ConsoleService) -> None:
        super().__init__(address, _Handler)
        self.service = service

    def shutdown(self) -> None:
        self.service.stopping.set()
        super().shutdown()


def build_server(store: StateStore, port: int, host: str = "127.0.0.1") -> ConsoleHttpServer:
    return ConsoleHttpServer((host, port), ConsoleService(store))


# --- telemetry sources ---


def run_simulator_source(store: StateStore, cfg: AppConfig, stop: threading.Event) -> None:
    """Drive the store from the embedded simulator until max_ticks or stop."""
    sim = FleetSimulator(cfg.sim)
    _, report = startup_load(store, sim.generate_fleet(), cfg.rules, cfg.cycle)
    logger.info("cycle %s", json.dumps(report.to_json()))
    pace = cfg.sim_tick_wall_s if cfg.sim_tick_wall_s is not None else float(cfg.sim.tick_period_s)
    ticks = 0
    while not stop.is_set() and (cfg.sim_max_ticks == 0 or ticks < cfg.sim_max_ticks):
        if stop.wait(pace):
            break
        _, report = run_cycle_managed(store, sim.tick(), cfg.rules, cfg.cycle)
        logger.info("cycle %s", json.dumps(report.to_json()))
        ticks += 1
    logger.info("simulator source finished after %d ticks", ticks)


def run_feed_source(store: StateStore, cfg: AppConfig, stop: threading.Event) -> None:
    """Drive the store from directory-dropped CSV cycles."""
    assert cfg.feed_dir is not None
    watcher = FeedWatcher(cfg.feed_dir, cfg.feed_poll_s, stop_event=stop)
    for batch in watcher.watch():
        if store.version == 0:
            _, report = startup_load(store, batch, cfg.rules, cfg.cycle)
        else:
            _, report = run_cycle_managed(store, batch, cfg.rules, cfg.cycle)
        logger.info("cycle %s", json.dumps(report.to_json()))


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="fleetmon-serve", description=__doc__)
    parser.add_argument("--config", help="path to a key=value config file")
    parser.add_argument("--feed-dir", help="directory to watch for feed cycles")
    parser.add_argument(
        "--simulate", action="store_true", help="run the embedded simulator instead of a feed"
    )
    parser.add_argument("--port", type=int, help="listen port (0 for ephemeral)")
    parser.add_argument("--seed", type=int, help="simulator seed override")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(name)s %(message)s")
    cfg = AppConfig.from_file(args.config) if args.config else AppConfig()
    if args.feed_dir:
        cfg.feed_dir = args.feed_dir
    if args.port is not None:
        cfg.service_port = args.port
    if args.seed is not None:
        from dataclasses import replace

        cfg.sim = replace(cfg.sim, seed=args.seed)
    if not args.simulate and not cfg.feed_dir:
        parser.error("either --simulate or a feed directory (--feed-dir / feed.dir) is required")

    store = StateStore(cfg.delta_retention)
    server = build_server(store, cfg.service_port)
    stop = server.service.stopping
    source = run_simulator_source if args.simulate else run_feed_source
    thread = threading.Thread(target=source, args=(store, cfg, stop), daemon=True, name="telemetry")
    thread.start()

    host, port = server.server_address[:2]
    print(f"fleetmon-serve listening on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
        server.server_close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
