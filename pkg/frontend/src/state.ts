// View state and pure transitions. The UI never mutates server state and
// every render is a function of this state alone.

import type {
  EndpointBody,
  ProjectionPoint,
  TraversalMode,
  TraverseRequestBody,
  TraverseResponse,
  WeightsBody,
} from './api.js';

export type EndpointSelection =
  | { kind: 'point'; id: string; x: number; y: number }
  | { kind: 'centroid'; label: string }
  | { kind: 'coords'; coords: number[] };

export interface TraversalParams {
  m: number;
  n: number;
  K: number;
  mode: TraversalMode;
  sigma: number;
  seed: number;
  weights: WeightsBody;
}

export interface ViewState {
  points: ProjectionPoint[];
  labels: string[];
  source: EndpointSelection | null;
  destination: EndpointSelection | null;
  params: TraversalParams;
  result: TraverseResponse | null;
  selectedPath: number;
  pending: boolean;
  error: string | null;
}

export const DEFAULT_PARAMS: TraversalParams = {
  m: 100,
  n: 8,
  K: 4,
  mode: 'perturb',
  sigma: 0.1,
  seed: 0,
  weights: { fingerprint: 1.0, sa: 0.0, drug_likeness: 0.0, activity: 0.0 },
};

export function initialState(): ViewState {
  return {
    points: [],
    labels: [],
    source: null,
    destination: null,
    params: { ...DEFAULT_PARAMS, weights: { ...DEFAULT_PARAMS.weights } },
    result: null,
    selectedPath: 0,
    pending: false,
    error: null,
  };
}

/** Clicking a point fills the source first, then the destination; further
 * clicks replace the destination. */
export function selectPoint(state: ViewState, point: ProjectionPoint): ViewState {
  const selection: EndpointSelection = {
    kind: 'point',
    id: point.id,
    x: point.x,
    y: point.y,
  };
  if (state.source === null) {
    return { ...state, source: selection };
  }
  return { ...state, destination: selection };
}

export function selectCentroid(
  state: ViewState,
  which: 'source' | 'destination',
  label: string,
): ViewState {
  const selection: EndpointSelection = { kind: 'centroid', label };
  return which === 'source'
    ? { ...state, source: selection }
    : { ...state, destination: selection };
}

export function clearEndpoints(state: ViewState): ViewState {
  return { ...state, source: null, destination: null };
}

/** "Explore from here": a generated point becomes the new source. */
export function exploreFrom(state: ViewState, pathIdx: number, pointIdx: number): ViewState {
  const path = state.result?.paths[pathIdx];
  const coords = path?.points[pointIdx];
  if (!coords) {
    return state;
  }
  return { ...state, source: { kind: 'coords', coords: [...coords] } };
}

export function setParams(state: ViewState, params: Partial<TraversalParams>): ViewState {
  return { ...state, params: { ...state.params, ...params } };
}

export function canRun(state: ViewState): boolean {
  return state.source !== null && state.destination !== null && !state.pending;
}

function endpointBody(selection: EndpointSelection): EndpointBody {
  switch (selection.kind) {
    case 'point':
      return { id: selection.id };
    case 'centroid':
      return { label: selection.label };
    case 'coords':
      return { coords: selection.coords };
  }
}

/** Request body for /api/traverse; null until both endpoints are chosen. */
export function buildRequest(state: ViewState): TraverseRequestBody | null {
  if (state.source === null || state.destination === null) {
    return null;
  }
  const p = state.params;
  return {
    source: endpointBody(state.source),
    destination: endpointBody(state.destination),
    m: p.m,
    n: p.n,
    K: p.K,
    weights: { ...p.weights },
    mode: p.mode,
    sigma: p.sigma,
    seed: p.seed,
  };
}

export function describeEndpoint(selection: EndpointSelection | null): string {
  if (selection === null) return 'none';
  switch (selection.kind) {
    case 'point':
      return `compound ${selection.id}`;
    case 'centroid':
      return `${selection.label} centroid`;
    case 'coords':
      return 'generated point';
  }
}
