/**
 * Detail panel: displays exactly what GET /v1/entity returned. The raw
 * response text is kept verbatim and every displayed value is lifted
 * straight from the parsed payload, never recomputed.
 */

import type { AlertPayload, EntityPayload } from './types.js';

export interface DetailPanel {
  name: string;
  raw: string;
  payload: EntityPayload;
  rows: [string, string][];
  alerts: AlertPayload[];
}

function formatValue(value: unknown): string {
  return typeof value === 'string' ? value : JSON.stringify(value);
}

export function buildDetailPanel(raw: string): DetailPanel {
  const payload = JSON.parse(raw) as EntityPayload;
  const rows: [string, string][] = [
    ['name', payload.name],
    ['kind', payload.kind],
    ['version', formatValue(payload.version)],
  ];
  for (const [field, value] of Object.entries(payload.record)) {
    rows.push([field, formatValue(value)]);
  }
  if (payload.appearance !== undefined) {
    rows.push(['appearance', payload.appearance]);
  }
  if (payload.color !== undefined) {
    rows.push(['color', payload.color]);
  }
  return {
    name: payload.name,
    raw,
    payload,
    rows,
    alerts: payload.alerts ?? [],
  };
}

export function renderPanelHtml(panel: DetailPanel | null): string {
  if (panel === null) {
    return '<p class="hint">Click a cell to inspect a node or sensor.</p>';
  }
  const rows = panel.rows
    .map(([label, value]) => `<tr><th>${label}</th><td>${value}</td></tr>`)
    .join('');
  const alerts = panel.alerts.length
    ? '<h4>Active alerts</h4><ul>' +
      panel.alerts
        .map(
          (a) =>
            `<li class="${a.severity}">${a.severity} ${a.dimension}: observed ${a.observed}, threshold ${a.threshold}</li>`,
        )
        .join('') +
      '</ul>'
    : '<p class="hint">No active alerts.</p>';
  return `<h3>${panel.name}</h3><table>${rows}</table>${alerts}`;
}
