// Thin typed client over the curation service. Every non-2xx response is
// surfaced as an ApiError carrying the structured {code, message, detail}
// body so the UI can show meaningful banners.

import type {
  EvaluateResponse,
  LibraryPayload,
  LockResponse,
  RunResponse,
  SchemaResponse,
  ServiceError,
} from './types.js';

export class ApiError extends Error {
  code: string;
  status: number;
  detail: unknown;

  constructor(status: number, body: ServiceError) {
    super(body.message || `request failed with ${status}`);
    this.code = body.code || 'Unknown';
    this.status = status;
    this.detail = body.detail;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string = '',
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { 'Content-Type': 'application/json' } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, { code: 'Unreachable', message: `service unreachable: ${err}`, detail: null });
    }
    if (!response.ok) {
      let payload: ServiceError;
      try {
        payload = (await response.json()) as ServiceError;
      } catch {
        payload = { code: `HTTP${response.status}`, message: response.statusText, detail: null };
      }
      throw new ApiError(response.status, payload);
    }
    return (await response.json()) as T;
  }

  listSchemas(): Promise<{ schemas: { schema_id: string; version: number; locked_by: string | null }[] }> {
    return this.request('GET', '/schemas');
  }

  getSchema(schemaId: string, version?: number): Promise<SchemaResponse> {
    const suffix = version === undefined ? '' : `?version=${version}`;
    return this.request('GET', `/schemas/${encodeURIComponent(schemaId)}${suffix}`);
  }

  putSchema(schemaId: string, library: LibraryPayload, token: string, editor: string): Promise<{ version: number }> {
    return this.request('PUT', `/schemas/${encodeURIComponent(schemaId)}`, { library, token, editor });
  }

  acquireLock(schemaId: string, holder: string): Promise<LockResponse> {
    return this.request('POST', `/schemas/${encodeURIComponent(schemaId)}/lock`, { holder });
  }

  releaseLock(schemaId: string, token: string): Promise<{ released: boolean }> {
    return this.request('DELETE', `/schemas/${encodeURIComponent(schemaId)}/lock?token=${encodeURIComponent(token)}`);
  }

  submitRun(body: {
    schema_id: string;
    document?: unknown;
    extraction_id?: string;
    gazetteer?: string;
    config?: Record<string, unknown>;
  }): Promise<RunResponse> {
    return this.request('POST', '/runs', body);
  }

  getRun(runId: string): Promise<RunResponse> {
    return this.request('GET', `/runs/${encodeURIComponent(runId)}`);
  }

  evaluate(learned: unknown, gold: unknown, seed = 0): Promise<EvaluateResponse> {
    return this.request('POST', '/evaluate', { learned, gold, seed });
  }
}
