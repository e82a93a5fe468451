import { describe, expect, it } from 'vitest';

import type { CompoundRow } from '../src/api.js';
import { activityHistogram, saHistogram } from '../src/histogram.js';

function row(sa: number | null, activityClass: string | null): CompoundRow {
  return {
    path: 0,
    point: 0,
    smiles: 'C',
    complete: true,
    valid: sa !== null,
    novel: true,
    properties: { mw: null, sa, drug_likeness: null, activity_class: activityClass },
    potential_label: null,
  };
}

describe('saHistogram', () => {
  it('uses nine unit bins over [1, 10]', () => {
    const bins = saHistogram([row(1.0, null), row(1.999, null), row(5.5, null), row(10.0, null)]);
    expect(bins).toHaveLength(9);
    expect(bins[0]).toBe(2); // 1.0 and 1.999 both in [1, 2)
    expect(bins[4]).toBe(1); // 5.5 in [5, 6)
    expect(bins[8]).toBe(1); // the 10.0 endpoint clamps into the last bin
  });

  it('skips rows without an SA value', () => {
    expect(saHistogram([row(null, null)])).toEqual(new Array(9).fill(0));
  });

  it('clamps out-of-range values instead of dropping them', () => {
    const bins = saHistogram([row(0.5, null), row(11.0, null)]);
    expect(bins[0]).toBe(1);
    expect(bins[8]).toBe(1);
  });
});

describe('activityHistogram', () => {
  it('counts the three classes in order', () => {
    const bins = activityHistogram([
      row(null, 'inactive'),
      row(null, 'active'),
      row(null, 'intermediate'),
      row(null, 'active'),
    ]);
    expect(bins).toEqual([1, 1, 2]);
  });

  it('ignores rows without a class', () => {
    expect(activityHistogram([row(null, null)])).toEqual([0, 0, 0]);
  });
});
