// Compound table for the selected path: SMILES text with validity and
// novelty badges, computed properties, and an explore-from-here control.

import type { CompoundRow, TraverseResponse } from './api.js';

export interface TableRow {
  pathIdx: number;
  pointIdx: number;
  smiles: string;
  validBadge: 'valid' | 'invalid';
  novelBadge: 'novel' | 'known';
  mw: string;
  sa: string;
  activityClass: string;
  potentialLabel: string;
}

function fmt(value: number | null, digits: number): string {
  return value === null ? '-' : value.toFixed(digits);
}

export function buildRows(result: TraverseResponse, selectedPath: number): TableRow[] {
  return result.compounds
    .filter((c) => c.path === selectedPath)
    .map((c: CompoundRow) => ({
      pathIdx: c.path,
      pointIdx: c.point,
      smiles: c.smiles,
      validBadge: c.valid ? 'valid' : 'invalid',
      novelBadge: c.novel ? 'novel' : 'known',
      mw: fmt(c.properties.mw, 2),
      sa: fmt(c.properties.sa, 3),
      activityClass: c.properties.activity_class ?? '-',
      potentialLabel: c.potential_label ?? '-',
    }));
}

export function renderTable(
  tbody: HTMLElement,
  rows: TableRow[],
  onExplore: (pathIdx: number, pointIdx: number) => void,
): void {
  const doc = tbody.ownerDocument;
  tbody.textContent = '';
  for (const row of rows) {
    const tr = doc.createElement('tr');
    tr.className = 'compound-row';

    const smilesCell = doc.createElement('td');
    smilesCell.className = 'smiles';
    smilesCell.textContent = row.smiles;
    tr.appendChild(smilesCell);

    const badgeCell = doc.createElement('td');
    for (const badge of [row.validBadge, row.novelBadge]) {
      const span = doc.createElement('span');
      span.className = `badge ${badge}`;
      span.textContent = badge;
      badgeCell.appendChild(span);
    }
    tr.appendChild(badgeCell);

    for (const text of [row.mw, row.sa, row.activityClass, row.potentialLabel]) {
      const td = doc.createElement('td');
      td.textContent = text;
      tr.appendChild(td);
    }

    const actionCell = doc.createElement('td');
    const button = doc.createElement('button');
    button.className = 'explore-from-here';
    button.textContent = 'explore from here';
    button.addEventListener('click', () => onExplore(row.pathIdx, row.pointIdx));
    actionCell.appendChild(button);
    tr.appendChild(actionCell);

    tbody.appendChild(tr);
  }
}
