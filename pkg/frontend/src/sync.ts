/**
 * Live update loop: initial snapshot, then the push channel applied in
 * version order, with automatic full resync when the cursor invalidates and
 * a polling fallback when the stream is unavailable.
 */

import type { ApiClient } from './client.js';
import { ClientStore } from './store.js';

export interface SyncCallbacks {
  /** Fired after any applied change (delta or full snapshot). */
  onChange: (changedNodes: string[] | null) => void;
  /** Fired when the client had to refetch the whole snapshot. */
  onResync?: () => void;
  /** Fired when the push stream is down and polling takes over. */
  onFallback?: (error: unknown) => void;
}

export const POLL_FALLBACK_MS = 2000;

export class LiveSync {
  readonly store = new ClientStore();
  private stopped = false;
  private abort: AbortController | null = null;

  constructor(
    private readonly client: ApiClient,
    private readonly callbacks: SyncCallbacks,
    private readonly pollMs: number = POLL_FALLBACK_MS,
  ) {}

  /** Run until stop(); resolves once the first snapshot is applied. */
  async start(): Promise<void> {
    await this.resync();
    void this.followStream();
  }

  stop(): void {
    this.stopped = true;
    this.abort?.abort();
  }

  private async resync(): Promise<void> {
    const snap = await this.client.snapshot();
    this.store.applySnapshot(snap);
    this.callbacks.onResync?.();
    this.callbacks.onChange(null);
  }

  private async followStream(): Promise<void> {
    while (!this.stopped) {
      this.abort = new AbortController();
      try {
        for await (const payload of this.client.stream(this.store.version, this.abort.signal)) {
          const outcome = this.store.apply(payload);
          if (outcome.applied) {
            this.callbacks.onChange(outcome.changedNodes);
          } else if (outcome.reason === 'resync' || outcome.reason === 'gap') {
            await this.resync();
          }
        }
        if (!this.stopped) {
          // Server closed the stream (e.g. after instructing a resync).
          // Resync, then wait before reconnecting: never hammer the server.
          await this.resync();
          await sleep(this.pollMs);
        }
      } catch (error) {
        if (this.stopped) {
          return;
        }
        this.callbacks.onFallback?.(error);
        await this.pollUntilStreamRetry();
      }
    }
  }

  /** Poll deltas at the fallback cadence for a few rounds, then retry the stream. */
  private async pollUntilStreamRetry(rounds = 3): Promise<void> {
    for (let i = 0; i < rounds && !this.stopped; i += 1) {
      await sleep(this.pollMs);
      try {
        const delta = await this.client.delta(this.store.version);
        if (delta.type === 'resync') {
          await this.resync();
        } else if (delta.version > this.store.version) {
          const outcome = this.store.apply(delta);
          if (outcome.applied) {
            this.callbacks.onChange(outcome.changedNodes);
          } else {
            await this.resync();
          }
        }
      } catch {
        // keep polling; the next stream retry may succeed
      }
    }
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
