// Application wiring: fetch the projection and label list, render the
// scatter and controls, run traversals against the API and feed results
// back into the view. At most one traversal is in flight at a time.

import { ApiClient, ApiError } from './api.js';
import type { TraversalMode, TraverseRequestBody } from './api.js';
import {
  ACTIVITY_BIN_LABELS,
  SA_BIN_LABELS,
  activityHistogram,
  saHistogram,
} from './histogram.js';
import { renderScatter } from './scatter.js';
import {
  buildRequest,
  canRun,
  clearEndpoints,
  describeEndpoint,
  exploreFrom,
  initialState,
  selectCentroid,
  selectPoint,
  setParams,
  type ViewState,
} from './state.js';
import { buildRows, renderTable } from './table.js';

export interface TraverseApi {
  projection: ApiClient['projection'];
  labels: ApiClient['labels'];
  traverse: (body: TraverseRequestBody) => ReturnType<ApiClient['traverse']>;
}

export interface App {
  getState(): ViewState;
  /** Resolves when all started work (loads, traversals) has settled. */
  idle(): Promise<void>;
}

function byId<T extends HTMLElement>(doc: Document, id: string): T {
  const el = doc.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function numberInput(doc: Document, id: string, fallback: number): number {
  const value = Number(byId<HTMLInputElement>(doc, id).value);
  return Number.isFinite(value) ? value : fallback;
}

export function initApp(doc: Document, client: TraverseApi): App {
  let state = initialState();
  let chain: Promise<void> = Promise.resolve();

  const svg = byId<HTMLElement>(doc, 'scatter') as unknown as SVGElement;
  const runButton = byId<HTMLButtonElement>(doc, 'run-button');
  const errorBanner = byId(doc, 'error-banner');
  const statsLine = byId(doc, 'stats');
  const sourceDesc = byId(doc, 'source-desc');
  const destDesc = byId(doc, 'dest-desc');
  const labelPicker = byId<HTMLSelectElement>(doc, 'centroid-label');
  const pathPicker = byId(doc, 'path-picker');
  const tableBody = byId(doc, 'compound-rows');
  const legend = byId(doc, 'legend');

  function track(work: Promise<void>): void {
    chain = chain.then(() => work).catch(() => undefined);
  }

  function update(next: ViewState): void {
    state = next;
    render();
  }

  function readParams(): ViewState {
    const mode = byId<HTMLSelectElement>(doc, 'mode').value as TraversalMode;
    return setParams(state, {
      m: numberInput(doc, 'param-m', 100),
      n: numberInput(doc, 'param-n', 8),
      K: numberInput(doc, 'param-k', 4),
      sigma: numberInput(doc, 'param-sigma', 0.1),
      seed: numberInput(doc, 'param-seed', 0),
      mode,
      weights: {
        fingerprint: numberInput(doc, 'w-fingerprint', 1.0),
        sa: numberInput(doc, 'w-sa', 0.0),
        drug_likeness: numberInput(doc, 'w-drug-likeness', 0.0),
        activity: numberInput(doc, 'w-activity', 0.0),
      },
    });
  }

  function runTraversal(): void {
    const prepared = readParams();
    const request = buildRequest(prepared);
    if (request === null || prepared.pending) return;
    update({ ...prepared, pending: true, error: null });
    track(
      client
        .traverse(request)
        .then((result) => update({ ...state, result, selectedPath: 0, pending: false }))
        .catch((err) => {
          const message =
            err instanceof ApiError ? `${err.kind}: ${err.detail}` : String(err);
          update({ ...state, pending: false, error: message });
        }),
    );
  }

  function render(): void {
    renderScatter(svg, state, {
      onPointClick: (point) => update(selectPoint(state, point)),
    });
    sourceDesc.textContent = describeEndpoint(state.source);
    destDesc.textContent = describeEndpoint(state.destination);
    runButton.disabled = !canRun(state);
    errorBanner.hidden = state.error === null;
    errorBanner.textContent = state.error ?? '';

    legend.textContent = '';
    for (const label of state.labels) {
      const chip = doc.createElement('span');
      chip.className = 'legend-chip';
      chip.textContent = label;
      legend.appendChild(chip);
    }

    pathPicker.textContent = '';
    if (state.result) {
      state.result.paths.forEach((path, idx) => {
        const button = doc.createElement('button');
        button.className = idx === state.selectedPath ? 'path-tab selected' : 'path-tab';
        button.textContent = `path ${idx} (cost ${path.cost.toFixed(3)})`;
        button.addEventListener('click', () => update({ ...state, selectedPath: idx }));
        pathPicker.appendChild(button);
      });
      const stats = state.result.stats;
      statsLine.textContent =
        `points ${stats.points ?? 0} | valid ${stats.valid ?? 0} | ` +
        `novel ${stats.novel ?? 0} | unique novel ${stats.unique_novel_syntactic ?? 0}`;
      renderTable(tableBody, buildRows(state.result, state.selectedPath), (p, j) =>
        update(exploreFrom(state, p, j)),
      );
      renderHistogram(byId(doc, 'sa-hist'), saHistogram(state.result.compounds), SA_BIN_LABELS);
      renderHistogram(
        byId(doc, 'activity-hist'),
        activityHistogram(state.result.compounds),
        ACTIVITY_BIN_LABELS,
      );
    } else {
      statsLine.textContent = state.points.length
        ? `${state.points.length} compounds loaded; pick two endpoints`
        : 'no compounds in the index';
      tableBody.textContent = '';
    }
  }

  function renderHistogram(
    host: HTMLElement,
    bins: number[],
    labels: readonly string[],
  ): void {
    host.textContent = '';
    const max = Math.max(1, ...bins);
    bins.forEach((count, idx) => {
      const row = doc.createElement('div');
      row.className = 'hist-row';
      const tag = doc.createElement('span');
      tag.className = 'hist-label';
      tag.textContent = labels[idx] ?? String(idx);
      const bar = doc.createElement('span');
      bar.className = 'hist-bar';
      bar.style.width = `${(100 * count) / max}%`;
      bar.setAttribute('data-count', String(count));
      const num = doc.createElement('span');
      num.className = 'hist-count';
      num.textContent = String(count);
      row.append(tag, bar, num);
      host.appendChild(row);
    });
  }

  byId<HTMLButtonElement>(doc, 'set-source-centroid').addEventListener('click', () => {
    if (labelPicker.value) update(selectCentroid(state, 'source', labelPicker.value));
  });
  byId<HTMLButtonElement>(doc, 'set-dest-centroid').addEventListener('click', () => {
    if (labelPicker.value) update(selectCentroid(state, 'destination', labelPicker.value));
  });
  byId<HTMLButtonElement>(doc, 'clear-endpoints').addEventListener('click', () =>
    update(clearEndpoints(state)),
  );
  runButton.addEventListener('click', runTraversal);

  track(
    Promise.all([client.projection(), client.labels()])
      .then(([points, labels]) => {
        update({ ...state, points, labels: labels.map((l) => l.label) });
        labelPicker.textContent = '';
        for (const entry of labels) {
          const option = doc.createElement('option');
          option.value = entry.label;
          option.textContent = `${entry.label} (${entry.count})`;
          labelPicker.appendChild(option);
        }
      })
      .catch((err) => {
        const message =
          err instanceof ApiError ? `${err.kind}: ${err.detail}` : String(err);
        update({ ...state, error: `failed to load projection: ${message}` });
      }),
  );

  render();
  return {
    getState: () => state,
    idle: () => chain,
  };
}

export function bootstrap(): void {
  if (typeof document !== 'undefined' && document.getElementById('scatter')) {
    initApp(document, new ApiClient(''));
  }
}

bootstrap();
