/** Synthetic payload builders for unit tests (no server involved). */

import type {
  AnalyticsPayload,
  AppearanceState,
  ArchClass,
  DeltaPayload,
  NodeBundlePayload,
  SnapshotPayload,
} from '../src/types';

export function analytics(overrides: Partial<AnalyticsPayload> = {}): AnalyticsPayload {
  const zeroStates = { OK: 0, WARNING: 0, ALERT: 0, DOWN: 0, STALE: 0 };
  return {
    state_counts: {
      AMD: { ...zeroStates },
      INTEL: { ...zeroStates },
      KNL: { ...zeroStates },
      GPU: { ...zeroStates },
    },
    total_jobs: 0,
    fleet_utilization: 0,
    active_alerts: { WARNING: 0, CRITICAL: 0 },
    per_user_slots: {},
    ...overrides,
  };
}

export function bundle(
  name: string,
  arch: ArchClass = 'KNL',
  appearance: AppearanceState = 'OK',
  color = 'green',
): NodeBundlePayload {
  return {
    record: {
      name,
      arch,
      timestamp: 1_700_000_000,
      cpu_load: 0.5,
      mem_free_gb: 90.0,
      disk_free_gb: 800.0,
      jobs_running: 2,
      cores_busy: 32,
      cores_total: 64,
      status_reported: appearance === 'DOWN' ? 'DOWN' : 'UP',
    },
    appearance,
    color,
    alerts: [],
  };
}

export function snapshot(
  version: number,
  nodes: Record<string, NodeBundlePayload>,
  jobs: SnapshotPayload['jobs'] = {},
): SnapshotPayload {
  return {
    version,
    batch_id: version,
    produced_at: 1_700_000_000 + version,
    nodes,
    sensors: {},
    jobs,
    analytics: analytics(),
  };
}

export function delta(
  since: number,
  version: number,
  nodes: Record<string, NodeBundlePayload> = {},
  extra: Partial<DeltaPayload> = {},
): DeltaPayload {
  return {
    type: 'delta',
    since,
    version,
    nodes,
    sensors: {},
    jobs: {},
    removed_jobs: [],
    analytics: analytics(),
    ...extra,
  };
}
