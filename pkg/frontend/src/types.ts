/**
 * Wire types for the /v1 API. Field names mirror the server payloads
 * exactly; the console never derives record fields client-side.
 */

export type ArchClass = 'AMD' | 'INTEL' | 'KNL' | 'GPU';
export type AppearanceState = 'OK' | 'WARNING' | 'ALERT' | 'DOWN' | 'STALE';
export type AlertSeverity = 'WARNING' | 'CRITICAL';

export interface NodeRecordPayload {
  name: string;
  arch: ArchClass;
  timestamp: number;
  cpu_load: number;
  mem_free_gb: number;
  disk_free_gb: number;
  jobs_running: number;
  cores_busy: number;
  cores_total: number;
  status_reported: 'UP' | 'DOWN';
}

export interface AlertPayload {
  entity: string;
  rule_arch: ArchClass;
  dimension: 'CPU_LOAD' | 'MEM_FREE' | 'DISK_FREE' | 'STALE';
  severity: AlertSeverity;
  observed: number;
  threshold: number;
  raised_at: number;
}

export interface NodeBundlePayload {
  record: NodeRecordPayload;
  appearance: AppearanceState;
  color: string;
  alerts: AlertPayload[];
}

export interface SensorPayload {
  name: string;
  zone: string;
  kind: 'TEMPERATURE_C' | 'HUMIDITY_PCT' | 'AIRFLOW_CFM' | 'POWER_KW';
  timestamp: number;
  value: number;
}

export interface JobPayload {
  job_id: string;
  user: string;
  arch_queue: ArchClass;
  slots: number;
  node_ids: string[];
}

export interface AnalyticsPayload {
  state_counts: Record<ArchClass, Record<AppearanceState, number>>;
  total_jobs: number;
  fleet_utilization: number;
  active_alerts: Record<AlertSeverity, number>;
  per_user_slots: Record<string, number>;
}

export interface SnapshotPayload {
  version: number;
  batch_id: number;
  produced_at: number;
  nodes: Record<string, NodeBundlePayload>;
  sensors: Record<string, SensorPayload>;
  jobs: Record<string, JobPayload>;
  analytics: AnalyticsPayload;
}

export interface DeltaPayload {
  type: 'delta';
  since: number;
  version: number;
  nodes: Record<string, NodeBundlePayload>;
  sensors: Record<string, SensorPayload>;
  jobs: Record<string, JobPayload>;
  removed_jobs: string[];
  analytics: AnalyticsPayload;
}

export interface ResyncPayload {
  type: 'resync';
  since: number;
  version: number;
}

export type StreamPayload = DeltaPayload | ResyncPayload;

export interface EntityPayload {
  version: number;
  name: string;
  kind: 'NODE' | 'SENSOR';
  record: NodeRecordPayload | SensorPayload;
  appearance?: AppearanceState;
  color?: string;
  alerts?: AlertPayload[];
}
