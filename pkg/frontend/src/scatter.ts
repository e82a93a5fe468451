// Projection scatter rendered as SVG: one circle per corpus compound
// coloured by label, endpoint highlights, and traversal path overlays drawn
// through the projected coordinates of each path's corpus nodes.

import type { PathJson, ProjectionPoint } from './api.js';
import type { EndpointSelection, ViewState } from './state.js';

export interface Viewport {
  width: number;
  height: number;
  pad: number;
}

export const DEFAULT_VIEWPORT: Viewport = { width: 640, height: 480, pad: 24 };

const LABEL_PALETTE = [
  '#4c78a8', '#f58518', '#54a24b', '#b279a2', '#e45756',
  '#72b7b2', '#eeca3b', '#9d755d',
];
const UNLABELLED_COLOR = '#9aa0a6';

export function labelColor(label: string | null, labels: string[]): string {
  if (!label) return UNLABELLED_COLOR;
  const idx = labels.indexOf(label);
  return idx < 0 ? UNLABELLED_COLOR : LABEL_PALETTE[idx % LABEL_PALETTE.length]!;
}

export type Transform = (x: number, y: number) => [number, number];

/** Affine map from data space onto the padded viewport; a degenerate extent
 * (single point) lands in the centre. */
export function fitTransform(
  points: ReadonlyArray<{ x: number; y: number }>,
  vp: Viewport = DEFAULT_VIEWPORT,
): Transform {
  let xMin = Infinity, xMax = -Infinity, yMin = Infinity, yMax = -Infinity;
  for (const p of points) {
    xMin = Math.min(xMin, p.x);
    xMax = Math.max(xMax, p.x);
    yMin = Math.min(yMin, p.y);
    yMax = Math.max(yMax, p.y);
  }
  if (points.length === 0) {
    xMin = xMax = yMin = yMax = 0;
  }
  const spanX = xMax - xMin || 1;
  const spanY = yMax - yMin || 1;
  const innerW = vp.width - 2 * vp.pad;
  const innerH = vp.height - 2 * vp.pad;
  return (x, y) => [
    vp.pad + ((x - xMin) / spanX) * innerW,
    // flip y so larger values render higher
    vp.pad + (1 - (y - yMin) / spanY) * innerH,
  ];
}

export interface CentroidMap {
  [label: string]: { x: number; y: number };
}

/** Label centroids in projection space. The projection is linear, so the
 * mean of projected points IS the projected centroid. */
export function projectionCentroids(points: ProjectionPoint[]): CentroidMap {
  const sums: Record<string, { x: number; y: number; n: number }> = {};
  for (const p of points) {
    if (!p.label) continue;
    const acc = (sums[p.label] ??= { x: 0, y: 0, n: 0 });
    acc.x += p.x;
    acc.y += p.y;
    acc.n += 1;
  }
  const out: CentroidMap = {};
  for (const [label, acc] of Object.entries(sums)) {
    out[label] = { x: acc.x / acc.n, y: acc.y / acc.n };
  }
  return out;
}

function endpoint2d(
  selection: EndpointSelection | null,
  centroids: CentroidMap,
): { x: number; y: number } | null {
  if (selection === null) return null;
  if (selection.kind === 'point') return { x: selection.x, y: selection.y };
  if (selection.kind === 'centroid') return centroids[selection.label] ?? null;
  return null; // raw latent coords have no client-side projection
}

/** Polyline vertices of a path overlay: projected endpoints where known,
 * plus the projected coordinates of the path's corpus nodes. */
export function overlayVertices(
  path: PathJson,
  points: ProjectionPoint[],
  source2d: { x: number; y: number } | null,
  dest2d: { x: number; y: number } | null,
): Array<{ x: number; y: number }> {
  const vertices: Array<{ x: number; y: number }> = [];
  if (source2d) vertices.push(source2d);
  for (const node of path.nodes) {
    const p = points[node];
    if (p) vertices.push({ x: p.x, y: p.y });
  }
  if (dest2d) vertices.push(dest2d);
  return vertices;
}

const SVG_NS = 'http://www.w3.org/2000/svg';

export interface ScatterHandlers {
  onPointClick(point: ProjectionPoint): void;
}

export function renderScatter(
  svg: SVGElement,
  state: ViewState,
  handlers: ScatterHandlers,
  vp: Viewport = DEFAULT_VIEWPORT,
): void {
  const doc = svg.ownerDocument;
  svg.setAttribute('viewBox', `0 0 ${vp.width} ${vp.height}`);
  while (svg.firstChild) svg.removeChild(svg.firstChild);
  const tf = fitTransform(state.points, vp);
  const centroids = projectionCentroids(state.points);

  for (const point of state.points) {
    const [cx, cy] = tf(point.x, point.y);
    const circle = doc.createElementNS(SVG_NS, 'circle');
    circle.setAttribute('class', 'corpus-point');
    circle.setAttribute('cx', String(cx));
    circle.setAttribute('cy', String(cy));
    circle.setAttribute('r', '3');
    circle.setAttribute('fill', labelColor(point.label, state.labels));
    circle.setAttribute('data-id', point.id);
    circle.addEventListener('click', () => handlers.onPointClick(point));
    svg.appendChild(circle);
  }

  const source2d = endpoint2d(state.source, centroids);
  const dest2d = endpoint2d(state.destination, centroids);
  if (state.result) {
    state.result.paths.forEach((path, idx) => {
      const vertices = overlayVertices(path, state.points, source2d, dest2d);
      if (vertices.length < 2) return;
      const line = doc.createElementNS(SVG_NS, 'polyline');
      line.setAttribute('class', idx === state.selectedPath ? 'path-overlay selected' : 'path-overlay');
      line.setAttribute('fill', 'none');
      line.setAttribute('stroke', idx === state.selectedPath ? '#d62728' : '#d6272866');
      line.setAttribute('stroke-width', idx === state.selectedPath ? '2.5' : '1.2');
      line.setAttribute(
        'points',
        vertices.map((v) => tf(v.x, v.y).join(',')).join(' '),
      );
      svg.appendChild(line);
    });
  }

  for (const [which, pos] of [['source', source2d], ['dest', dest2d]] as const) {
    if (!pos) continue;
    const [cx, cy] = tf(pos.x, pos.y);
    const marker = doc.createElementNS(SVG_NS, 'circle');
    marker.setAttribute('class', `endpoint-marker ${which}`);
    marker.setAttribute('cx', String(cx));
    marker.setAttribute('cy', String(cy));
    marker.setAttribute('r', '7');
    marker.setAttribute('fill', 'none');
    marker.setAttribute('stroke', which === 'source' ? '#1a8a1a' : '#c21717');
    marker.setAttribute('stroke-width', '2.5');
    svg.appendChild(marker);
  }
}
