/**
 * Thin typed client for the monitoring API.
 * The fetch function is injectable so tests can intercept every request.
 */

import type {
  EventInput,
  ModelInfo,
  ModelStructure,
  Recommendation,
  SessionCreated,
  SessionState,
  Snapshot,
} from './types';

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
    private readonly base: string = '/api/v1',
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { 'content-type': 'application/json' } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.base + path, init);
    if (!response.ok) {
      let message = `${method} ${path} failed with ${response.status}`;
      try {
        const payload = (await response.json()) as { error?: string };
        if (payload.error) message = payload.error;
      } catch {
        // keep the generic message
      }
      throw new ApiError(response.status, message);
    }
    if (response.status === 204) {
      return undefined as T;
    }
    return (await response.json()) as T;
  }

  listModels(): Promise<ModelInfo[]> {
    return this.request('GET', '/models');
  }

  modelStructure(modelId: string): Promise<ModelStructure> {
    return this.request('GET', `/models/${modelId}/structure`);
  }

  createSession(modelId: string): Promise<SessionCreated> {
    return this.request('POST', '/sessions', { model: modelId });
  }

  async postEvent(sessionId: string, event: EventInput): Promise<Snapshot> {
    const body = await this.request<{ snapshot: Snapshot }>(
      'POST',
      `/sessions/${sessionId}/events`,
      event,
    );
    return body.snapshot;
  }

  async whatIf(sessionId: string, event: EventInput): Promise<Snapshot> {
    const body = await this.request<{ snapshot: Snapshot }>(
      'POST',
      `/sessions/${sessionId}/what-if`,
      event,
    );
    return body.snapshot;
  }

  recommendations(sessionId: string): Promise<Recommendation> {
    return this.request('GET', `/sessions/${sessionId}/recommendations`);
  }

  sessionState(sessionId: string): Promise<SessionState> {
    return this.request('GET', `/sessions/${sessionId}/state`);
  }

  deleteSession(sessionId: string): Promise<void> {
    return this.request('DELETE', `/sessions/${sessionId}`);
  }
}
