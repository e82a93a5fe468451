// Fixed-bin histograms over the generated compound set: synthetic
// accessibility in nine unit bins over [1, 10], binding activity as the
// three classes.

import type { CompoundRow } from './api.js';

export const SA_BIN_LABELS = [
  '1-2', '2-3', '3-4', '4-5', '5-6', '6-7', '7-8', '8-9', '9-10',
] as const;

export const ACTIVITY_BIN_LABELS = ['inactive', 'intermediate', 'active'] as const;

export function saHistogram(rows: CompoundRow[]): number[] {
  const bins = new Array<number>(9).fill(0);
  for (const row of rows) {
    const sa = row.properties.sa;
    if (sa === null) continue;
    const idx = Math.min(8, Math.max(0, Math.floor(sa - 1)));
    bins[idx] = (bins[idx] ?? 0) + 1;
  }
  return bins;
}

export function activityHistogram(rows: CompoundRow[]): number[] {
  const bins = [0, 0, 0];
  for (const row of rows) {
    const idx = ACTIVITY_BIN_LABELS.indexOf(
      (row.properties.activity_class ?? '') as (typeof ACTIVITY_BIN_LABELS)[number],
    );
    if (idx >= 0) bins[idx] = (bins[idx] ?? 0) + 1;
  }
  return bins;
}
