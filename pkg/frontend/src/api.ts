// Typed client for the moltraverse HTTP API. Request and response shapes
// mirror the service JSON contract field for field.

export interface ProjectionPoint {
  id: string;
  x: number;
  y: number;
  label: string | null;
}

export interface LabelCount {
  label: string;
  count: number;
}

export interface WeightsBody {
  fingerprint: number;
  sa: number;
  drug_likeness: number;
  activity: number;
}

export interface EndpointBody {
  coords?: number[];
  label?: string;
  id?: string;
}

export type TraversalMode = 'yen' | 'perturb' | 'vary_m';

export interface TraverseRequestBody {
  source: EndpointBody;
  destination: EndpointBody;
  m: number;
  n: number;
  K: number;
  weights: WeightsBody;
  mode: TraversalMode;
  sigma: number;
  seed: number;
}

export interface CompoundProperties {
  mw: number | null;
  sa: number | null;
  drug_likeness: number | null;
  activity_class: string | null;
}

export interface CompoundRow {
  path: number;
  point: number;
  smiles: string;
  complete: boolean;
  valid: boolean;
  novel: boolean;
  properties: CompoundProperties;
  potential_label: string | null;
}

export interface PathJson {
  nodes: number[];
  cost: number;
  m: number;
  points: number[][];
}

export interface TraverseResponse {
  paths: PathJson[];
  compounds: CompoundRow[];
  stats: Record<string, number>;
  n_components: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly kind: string,
    readonly detail: string,
  ) {
    super(`${kind}: ${detail}`);
  }
}

async function unwrap<T>(response: Response): Promise<T> {
  if (response.ok) {
    return (await response.json()) as T;
  }
  let kind = `http ${response.status}`;
  let detail = response.statusText;
  try {
    const body = (await response.json()) as { error?: string; detail?: string };
    if (body.error) kind = body.error;
    if (body.detail) detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, kind, detail);
}

export class ApiClient {
  constructor(readonly baseUrl: string = '') {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async health(): Promise<{ status: string }> {
    return unwrap(await fetch(this.url('/api/health')));
  }

  async projection(): Promise<ProjectionPoint[]> {
    const body = await unwrap<{ points: ProjectionPoint[] }>(
      await fetch(this.url('/api/projection')),
    );
    return body.points;
  }

  async labels(): Promise<LabelCount[]> {
    const body = await unwrap<{ labels: LabelCount[] }>(
      await fetch(this.url('/api/labels')),
    );
    return body.labels;
  }

  async encode(smiles: string): Promise<number[]> {
    const body = await unwrap<{ coords: number[] }>(
      await fetch(this.url('/api/encode'), {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ smiles }),
      }),
    );
    return body.coords;
  }

  async traverse(request: TraverseRequestBody): Promise<TraverseResponse> {
    return unwrap(
      await fetch(this.url('/api/traverse'), {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify(request),
      }),
    );
  }
}
