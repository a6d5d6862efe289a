import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    // The replay suite spawns a real telemetry service; run files serially
    // so the end-to-end test gets the host to itself.
    fileParallelism: false,
    testTimeout: 20_000,
    hookTimeout: 30_000,
  },
});
