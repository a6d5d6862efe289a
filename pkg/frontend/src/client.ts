/**
 * Fetch-based client for the /v1 API, usable from browsers and Node alike.
 * The stream reader parses the server-push channel (SSE frames) into typed
 * payloads via an async generator.
 */

import type {
  AnalyticsPayload,
  DeltaPayload,
  EntityPayload,
  SnapshotPayload,
  StreamPayload,
} from './types.js';

export class ApiError extends Error {
  constructor(readonly status: number, readonly body: string) {
    super(`API error ${status}: ${body.slice(0, 200)}`);
  }
}

/** Parse an SSE byte stream into the data payload of each event. */
export async function* sseData(body: ReadableStream<Uint8Array>): AsyncGenerator<string> {
  const decoder = new TextDecoder();
  let buffer = '';
  for await (const chunk of body as unknown as AsyncIterable<Uint8Array>) {
    buffer += decoder.decode(chunk, { stream: true });
    let split: number;
    while ((split = buffer.indexOf('\n\n')) >= 0) {
      const frame = buffer.slice(0, split);
      buffer = buffer.slice(split + 2);
      const data = frame
        .split('\n')
        .filter((line) => line.startsWith('data: '))
        .map((line) => line.slice('data: '.length))
        .join('\n');
      if (data) {
        yield data;
      }
    }
  }
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async getJson<T>(path: string): Promise<T> {
    const resp = await fetch(this.baseUrl + path);
    const text = await resp.text();
    if (!resp.ok) {
      throw new ApiError(resp.status, text);
    }
    return JSON.parse(text) as T;
  }

  health(): Promise<{ status: string; version: number; uptime_s: number }> {
    return this.getJson('/v1/health');
  }

  snapshot(): Promise<SnapshotPayload> {
    return this.getJson('/v1/snapshot');
  }

  delta(since: number): Promise<DeltaPayload | { type: 'resync' }> {
    return this.getJson(`/v1/delta?since=${since}`);
  }

  analytics(): Promise<{ version: number; analytics: AnalyticsPayload }> {
    return this.getJson('/v1/analytics');
  }

  /** Raw response for an entity: the detail panel keeps these exact bytes. */
  async entityRaw(name: string): Promise<{ status: number; text: string }> {
    const resp = await fetch(`${this.baseUrl}/v1/entity/${encodeURIComponent(name)}`);
    return { status: resp.status, text: await resp.text() };
  }

  async entity(name: string): Promise<EntityPayload | null> {
    const { status, text } = await this.entityRaw(name);
    if (status === 404) {
      return null;
    }
    if (status !== 200) {
      throw new ApiError(status, text);
    }
    return JSON.parse(text) as EntityPayload;
  }

  /**
   * Follow the push channel from a version cursor, yielding one payload per
   * published version in order. Ends when the server closes the stream
   * (resync instruction) or the signal aborts.
   */
  async *stream(since: number, signal?: AbortSignal): AsyncGenerator<StreamPayload> {
    const resp = await fetch(`${this.baseUrl}/v1/stream?since=${since}`, { signal });
    if (!resp.ok || resp.body === null) {
      throw new ApiError(resp.status, await resp.text());
    }
    for await (const data of sseData(resp.body)) {
      yield JSON.parse(data) as StreamPayload;
    }
  }
}
