/**
 * Client-side replica of the server snapshot, maintained by applying the
 * full snapshot once and then deltas strictly in version order. Values are
 * stored verbatim from the wire; rendering never recomputes record fields.
 */

import type {
  AnalyticsPayload,
  DeltaPayload,
  JobPayload,
  NodeBundlePayload,
  SensorPayload,
  SnapshotPayload,
  StreamPayload,
} from './types.js';

export type ApplyOutcome =
  | { applied: true; changedNodes: string[] }
  | { applied: false; reason: 'stale' | 'gap' | 'resync' };

export class ClientStore {
  version = 0;
  nodes = new Map<string, NodeBundlePayload>();
  sensors = new Map<string, SensorPayload>();
  jobs = new Map<string, JobPayload>();
  analytics: AnalyticsPayload | null = null;

  /** Full resync: replace everything with one server snapshot. */
  applySnapshot(snap: SnapshotPayload): void {
    this.nodes = new Map(Object.entries(snap.nodes));
    this.sensors = new Map(Object.entries(snap.sensors));
    this.jobs = new Map(Object.entries(snap.jobs));
    this.analytics = snap.analytics;
    this.version = snap.version;
  }

  /**
   * Apply one streamed payload. Deltas must chain from the current version;
   * anything older is ignored, a gap or an explicit resync instruction tells
   * the caller to refetch the snapshot. The analytics header and version
   * swap together in the same turn, so views never mix versions.
   */
  apply(payload: StreamPayload): ApplyOutcome {
    if (payload.type === 'resync') {
      return { applied: false, reason: 'resync' };
    }
    if (payload.version <= this.version) {
      return { applied: false, reason: 'stale' };
    }
    if (payload.since !== this.version) {
      return { applied: false, reason: 'gap' };
    }
    return { applied: true, changedNodes: this.applyDelta(payload) };
  }

  private applyDelta(delta: DeltaPayload): string[] {
    const changed: string[] = [];
    for (const [name, bundle] of Object.entries(delta.nodes)) {
      this.nodes.set(name, bundle);
      changed.push(name);
    }
    for (const [name, record] of Object.entries(delta.sensors)) {
      this.sensors.set(name, record);
    }
    for (const [jobId, job] of Object.entries(delta.jobs)) {
      this.jobs.set(jobId, job);
    }
    for (const jobId of delta.removed_jobs) {
      this.jobs.delete(jobId);
    }
    this.analytics = delta.analytics;
    this.version = delta.version;
    return changed;
  }

  /** Plain-object view with sorted keys, for equality checks against the server. */
  toComparable(): unknown {
    const sorted = <T>(map: Map<string, T>) =>
      Object.fromEntries([...map.entries()].sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0)));
    return {
      version: this.version,
      nodes: sorted(this.nodes),
      sensors: sorted(this.sensors),
      jobs: sorted(this.jobs),
      analytics: this.analytics,
    };
  }
}

/** The same comparable shape, built from a raw server snapshot payload. */
export function snapshotComparable(snap: SnapshotPayload): unknown {
  const store = new ClientStore();
  store.applySnapshot(snap);
  return store.toComparable();
}
