/**
 * Browser bootstrap: wires the API client, live sync, floor grid, analytics
 * header and detail panel together. Configuration is a single baseUrl,
 * taken from the ?api= query parameter (default: same origin).
 */

import { ApiClient } from './client.js';
import { buildFloorModel, renderFloorHtml } from './grid.js';
import { buildDetailPanel, renderPanelHtml } from './panel.js';
import { LiveSync } from './sync.js';

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get('api') ?? window.location.origin;
const client = new ApiClient(baseUrl);

const gridEl = document.getElementById('grid') as HTMLElement;
const headerEl = document.getElementById('analytics') as HTMLElement;
const panelEl = document.getElementById('panel') as HTMLElement;
const statusEl = document.getElementById('status') as HTMLElement;

let selected: string | null = null;

function renderHeader(): void {
  const a = sync.store.analytics;
  if (a === null) {
    headerEl.textContent = 'waiting for data…';
    return;
  }
  const alerts = `${a.active_alerts.WARNING} warn / ${a.active_alerts.CRITICAL} crit`;
  const util = (a.fleet_utilization * 100).toFixed(1);
  headerEl.innerHTML =
    `<b>v${sync.store.version}</b> · ${sync.store.nodes.size} nodes · ` +
    `utilization ${util}% · jobs ${a.total_jobs} · alerts ${alerts}`;
}

function renderGrid(): void {
  gridEl.innerHTML = renderFloorHtml(buildFloorModel(sync.store));
}

async function showEntity(name: string): Promise<void> {
  selected = name;
  const { status, text } = await client.entityRaw(name);
  if (status === 200) {
    panelEl.innerHTML = renderPanelHtml(buildDetailPanel(text));
  } else {
    panelEl.innerHTML = `<p class="hint">${name}: not found</p>`;
  }
}

const sync = new LiveSync(client, {
  onChange(changedNodes) {
    renderHeader();
    renderGrid();
    statusEl.textContent = `live · ${baseUrl}`;
    if (selected !== null && (changedNodes === null || changedNodes.includes(selected))) {
      void showEntity(selected);
    }
  },
  onResync() {
    statusEl.textContent = `resynced · ${baseUrl}`;
  },
  onFallback() {
    statusEl.textContent = `stream down, polling · ${baseUrl}`;
  },
});

gridEl.addEventListener('click', (event) => {
  const target = event.target as HTMLElement;
  const name = target.dataset?.name;
  if (name) {
    void showEntity(name);
  }
});

panelEl.innerHTML = renderPanelHtml(null);
statusEl.textContent = `connecting to ${baseUrl}…`;
sync.start().catch((error) => {
  statusEl.textContent = `failed to reach ${baseUrl}: ${error}`;
});
