import { describe, expect, it } from 'vitest';

import type { ApiClient } from '../src/client';
import { LiveSync } from '../src/sync';
import type { StreamPayload } from '../src/types';
import { bundle, delta, snapshot } from './fixtures';

function until(predicate: () => boolean, timeoutMs = 2000): Promise<void> {
  return new Promise((resolve, reject) => {
    const started = Date.now();
    const timer = setInterval(() => {
      if (predicate()) {
        clearInterval(timer);
        resolve();
      } else if (Date.now() - started > timeoutMs) {
        clearInterval(timer);
        reject(new Error('condition not reached'));
      }
    }, 5);
  });
}

describe('LiveSync', () => {
  it('applies streamed deltas and resyncs on a version gap', async () => {
    let snapshotCalls = 0;
    const fake = {
      async snapshot() {
        snapshotCalls += 1;
        return snapshot(snapshotCalls === 1 ? 1 : 5, { n0001: bundle('n0001') });
      },
      async *stream(since: number): AsyncGenerator<StreamPayload> {
        if (since === 1) {
          yield delta(1, 2, { n0001: bundle('n0001', 'KNL', 'WARNING', 'yellow') });
          yield delta(4, 5); // gap: version 3 missing
        }
        await new Promise(() => {}); // later connections idle like a live stream
      },
      async delta(since: number) {
        return delta(since, since);
      },
    } as unknown as ApiClient;

    const changes: (string[] | null)[] = [];
    let resyncs = 0;
    const sync = new LiveSync(
      fake,
      {
        onChange: (names) => changes.push(names),
        onResync: () => {
          resyncs += 1;
        },
      },
      10,
    );
    await sync.start();
    await until(() => sync.store.version === 5 && resyncs >= 2);
    sync.stop();
    expect(changes[0]).toBeNull(); // initial snapshot
    expect(changes[1]).toEqual(['n0001']); // the in-order delta
    expect(sync.store.nodes.get('n0001')?.appearance).toBe('OK'); // from resync snapshot
  });

  it('falls back to polling when the stream is unavailable', async () => {
    let fallbacks = 0;
    const fake = {
      async snapshot() {
        return snapshot(1, { n0001: bundle('n0001') });
      },
      // eslint-disable-next-line require-yield
      async *stream(): AsyncGenerator<StreamPayload> {
        throw new Error('stream down');
      },
      async delta(since: number) {
        return delta(since, since + 1, {
          n0001: bundle('n0001', 'KNL', 'STALE', 'blue'),
        });
      },
    } as unknown as ApiClient;

    const sync = new LiveSync(
      fake,
      {
        onChange: () => {},
        onFallback: () => {
          fallbacks += 1;
        },
      },
      5,
    );
    await sync.start();
    await until(() => sync.store.version >= 2);
    sync.stop();
    expect(fallbacks).toBeGreaterThan(0);
    expect(sync.store.nodes.get('n0001')?.appearance).toBe('STALE');
  });
});
