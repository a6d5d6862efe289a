import { describe, expect, it } from 'vitest';

import { ClientStore, snapshotComparable } from '../src/store';
import { bundle, delta, snapshot } from './fixtures';

describe('ClientStore', () => {
  it('applies a snapshot wholesale', () => {
    const store = new ClientStore();
    store.applySnapshot(snapshot(3, { n0001: bundle('n0001'), n0002: bundle('n0002') }));
    expect(store.version).toBe(3);
    expect(store.nodes.size).toBe(2);
    expect(store.analytics).not.toBeNull();
  });

  it('applies deltas only in version order', () => {
    const store = new ClientStore();
    store.applySnapshot(snapshot(3, { n0001: bundle('n0001') }));

    const ok = store.apply(delta(3, 4, { n0001: bundle('n0001', 'KNL', 'ALERT', 'red') }));
    expect(ok).toEqual({ applied: true, changedNodes: ['n0001'] });
    expect(store.version).toBe(4);
    expect(store.nodes.get('n0001')?.appearance).toBe('ALERT');

    expect(store.apply(delta(3, 4))).toEqual({ applied: false, reason: 'stale' });
    expect(store.apply(delta(6, 7))).toEqual({ applied: false, reason: 'gap' });
    expect(store.apply({ type: 'resync', since: 4, version: 9 })).toEqual({
      applied: false,
      reason: 'resync',
    });
    expect(store.version).toBe(4);
  });

  it('tracks job arrivals and removals', () => {
    const store = new ClientStore();
    const job = { job_id: 'j1', user: 'u1', arch_queue: 'KNL' as const, slots: 64, node_ids: ['n0001'] };
    store.applySnapshot(snapshot(1, {}, { j1: job }));
    expect(store.jobs.size).toBe(1);
    store.apply(delta(1, 2, {}, { jobs: { j2: { ...job, job_id: 'j2' } }, removed_jobs: ['j1'] }));
    expect([...store.jobs.keys()]).toEqual(['j2']);
  });

  it('swaps analytics and version together', () => {
    const store = new ClientStore();
    store.applySnapshot(snapshot(1, {}));
    const next = delta(1, 2);
    next.analytics.total_jobs = 42;
    store.apply(next);
    expect(store.version).toBe(2);
    expect(store.analytics?.total_jobs).toBe(42);
  });

  it('compares equal regardless of map insertion order', () => {
    const a = new ClientStore();
    a.applySnapshot(snapshot(1, { b: bundle('b'), a: bundle('a') }));
    const b = new ClientStore();
    b.applySnapshot(snapshot(1, { a: bundle('a'), b: bundle('b') }));
    expect(JSON.stringify(a.toComparable())).toBe(JSON.stringify(b.toComparable()));
    expect(snapshotComparable(snapshot(1, { a: bundle('a'), b: bundle('b') }))).toEqual(
      a.toComparable(),
    );
  });
});
