// UI round trip against a live service (started in tests/server.setup.ts):
// selecting two labelled centroids and running a traversal renders exactly
// m compound rows and a path overlay, and "explore from here" issues a
// second traversal whose source coords equal the selected row's coords.

import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import { beforeEach, describe, expect, it } from 'vitest';

import { ApiClient, type TraverseRequestBody } from '../src/api.js';
import { initApp, type App } from '../src/main.js';
import { API_BASE } from './server.setup.js';

// stylesheet and module-script tags are build artifacts the DOM fixture
// must not try to fetch
const HTML = readFileSync(
  join(dirname(fileURLToPath(import.meta.url)), '..', 'index.html'),
  'utf-8',
)
  .replace(/<link rel="stylesheet"[^>]*>/, '')
  .replace(/<script type="module"[^>]*><\/script>/, '');

class RecordingClient extends ApiClient {
  requests: TraverseRequestBody[] = [];

  override async traverse(request: TraverseRequestBody) {
    this.requests.push(structuredClone(request));
    return super.traverse(request);
  }
}

function mountApp(): { app: App; client: RecordingClient } {
  document.documentElement.innerHTML = HTML;
  const client = new RecordingClient(API_BASE);
  const app = initApp(document, client);
  return { app, client };
}

function setInput(id: string, value: string): void {
  (document.getElementById(id) as HTMLInputElement).value = value;
}

function click(selector: string): void {
  const el = document.querySelector(selector) as HTMLElement | null;
  expect(el, `clickable element ${selector}`).not.toBeNull();
  el!.dispatchEvent(new MouseEvent('click', { bubbles: true }));
}

describe('UI round trip against the live service', () => {
  beforeEach(() => {
    document.documentElement.innerHTML = '';
  });

  it('loads the projection and label list', async () => {
    const { app } = mountApp();
    await app.idle();
    const state = app.getState();
    expect(state.points.length).toBeGreaterThanOrEqual(100);
    expect(state.labels).toContain('DIABETES');
    expect(state.labels).toContain('LUNG CANCER');
    expect(document.querySelectorAll('#scatter .corpus-point').length).toBe(
      state.points.length,
    );
    expect(
      Array.from(document.querySelectorAll('#centroid-label option')).map(
        (o) => (o as HTMLOptionElement).value,
      ),
    ).toContain('DIABETES');
  });

  it('runs a centroid traversal, renders m rows per path and an overlay', async () => {
    const { app } = mountApp();
    await app.idle();

    const picker = document.getElementById('centroid-label') as HTMLSelectElement;
    picker.value = 'DIABETES';
    click('#set-source-centroid');
    picker.value = 'LUNG CANCER';
    click('#set-dest-centroid');
    setInput('param-m', '12');
    setInput('param-n', '8');
    setInput('param-k', '2');
    setInput('param-seed', '5');
    (document.getElementById('mode') as HTMLSelectElement).value = 'perturb';

    const runButton = document.getElementById('run-button') as HTMLButtonElement;
    expect(runButton.disabled).toBe(false);
    click('#run-button');
    await app.idle();

    const state = app.getState();
    expect(state.error).toBeNull();
    expect(state.result).not.toBeNull();
    expect(state.result!.paths).toHaveLength(2);
    for (const path of state.result!.paths) {
      expect(path.points).toHaveLength(12);
    }
    // exactly m compound rows for the selected path
    expect(document.querySelectorAll('#compound-rows tr').length).toBe(12);
    // at least one path overlay polyline on the scatter
    expect(
      document.querySelectorAll('#scatter .path-overlay').length,
    ).toBeGreaterThanOrEqual(1);
    // stats line reflects the run
    expect(document.getElementById('stats')!.textContent).toContain('points 24');
    // histograms rendered with fixed bins
    expect(document.querySelectorAll('#sa-hist .hist-row').length).toBe(9);
    expect(document.querySelectorAll('#activity-hist .hist-row').length).toBe(3);
  });

  it('explore-from-here reruns with the selected row coords as source', async () => {
    const { app, client } = mountApp();
    await app.idle();

    const picker = document.getElementById('centroid-label') as HTMLSelectElement;
    picker.value = 'DIABETES';
    click('#set-source-centroid');
    picker.value = 'LUNG CANCER';
    click('#set-dest-centroid');
    setInput('param-m', '8');
    setInput('param-k', '1');
    (document.getElementById('mode') as HTMLSelectElement).value = 'yen';
    click('#run-button');
    await app.idle();
    expect(client.requests).toHaveLength(1);

    const first = app.getState().result!;
    const rowIdx = 3;
    const expectedCoords = first.paths[0]!.points[rowIdx]!;
    const buttons = document.querySelectorAll('#compound-rows .explore-from-here');
    expect(buttons.length).toBe(8);
    buttons[rowIdx]!.dispatchEvent(new MouseEvent('click', { bubbles: true }));
    expect(app.getState().source).toEqual({ kind: 'coords', coords: expectedCoords });
    expect(document.getElementById('source-desc')!.textContent).toBe('generated point');

    click('#run-button');
    await app.idle();
    expect(client.requests).toHaveLength(2);
    expect(client.requests[1]!.source).toEqual({ coords: expectedCoords });
    expect(client.requests[1]!.destination).toEqual({ label: 'LUNG CANCER' });
    expect(app.getState().error).toBeNull();
    expect(app.getState().result!.paths[0]!.points).toHaveLength(8);
  });

  it('surfaces server errors inline without an overlay', async () => {
    const { app } = mountApp();
    await app.idle();

    const picker = document.getElementById('centroid-label') as HTMLSelectElement;
    picker.value = 'DIABETES';
    click('#set-source-centroid');
    click('#set-dest-centroid');
    setInput('param-m', '1'); // m >= 2 rejected by the service with a 400
    click('#run-button');
    await app.idle();

    const state = app.getState();
    expect(state.error).toContain('m must be >= 2');
    const banner = document.getElementById('error-banner')!;
    expect(banner.hidden).toBe(false);
    expect(document.querySelectorAll('#scatter .path-overlay').length).toBe(0);
  });

  it('deterministic replay renders the identical table', async () => {
    async function runOnce(): Promise<string> {
      const { app } = mountApp();
      await app.idle();
      const picker = document.getElementById('centroid-label') as HTMLSelectElement;
      picker.value = 'DIABETES';
      click('#set-source-centroid');
      picker.value = 'HYPERTENSION';
      click('#set-dest-centroid');
      setInput('param-m', '10');
      setInput('param-k', '2');
      setInput('param-seed', '11');
      click('#run-button');
      await app.idle();
      return document.getElementById('compound-rows')!.innerHTML;
    }

    const first = await runOnce();
    const second = await runOnce();
    expect(first).toBe(second);
    expect(first.length).toBeGreaterThan(0);
  });
});
