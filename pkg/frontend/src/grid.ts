/**
 * Floor grid model: one cell per node, colored by the server-provided
 * appearance color, grouped into architecture sections, plus the legend.
 */

import type { ClientStore } from './store.js';
import type { AppearanceState, ArchClass } from './types.js';

export const ARCH_ORDER: ArchClass[] = ['AMD', 'INTEL', 'KNL', 'GPU'];

export const LEGEND: { state: AppearanceState; color: string }[] = [
  { state: 'OK', color: 'green' },
  { state: 'WARNING', color: 'yellow' },
  { state: 'ALERT', color: 'red' },
  { state: 'DOWN', color: 'gray' },
  { state: 'STALE', color: 'blue' },
];

export interface FloorCell {
  name: string;
  state: AppearanceState;
  color: string;
}

export interface FloorSection {
  arch: ArchClass;
  cells: FloorCell[];
}

export interface FloorModel {
  version: number;
  nodeCount: number;
  sections: FloorSection[];
  legend: typeof LEGEND;
}

export function buildFloorModel(store: ClientStore): FloorModel {
  const byArch = new Map<ArchClass, FloorCell[]>();
  for (const [name, bundle] of store.nodes) {
    const cells = byArch.get(bundle.record.arch) ?? [];
    if (cells.length === 0) {
      byArch.set(bundle.record.arch, cells);
    }
    cells.push({ name, state: bundle.appearance, color: bundle.color });
  }
  const sections: FloorSection[] = [];
  for (const arch of ARCH_ORDER) {
    const cells = byArch.get(arch);
    if (cells) {
      cells.sort((a, b) => (a.name < b.name ? -1 : a.name > b.name ? 1 : 0));
      sections.push({ arch, cells });
    }
  }
  return {
    version: store.version,
    nodeCount: store.nodes.size,
    sections,
    legend: LEGEND,
  };
}

/** Static HTML for the grid; cells carry data-name for click delegation. */
export function renderFloorHtml(model: FloorModel): string {
  const legend = model.legend
    .map((e) => `<span class="legend-item"><i class="cell ${e.state}"></i>${e.state}</span>`)
    .join('');
  const sections = model.sections
    .map((section) => {
      const cells = section.cells
        .map(
          (cell) =>
            `<i class="cell ${cell.state}" data-name="${cell.name}" title="${cell.name}"></i>`,
        )
        .join('');
      return `<div class="section"><h3>${section.arch} (${section.cells.length})</h3><div class="cells">${cells}</div></div>`;
    })
    .join('');
  return `<div class="legend">${legend}</div>${sections}`;
}
