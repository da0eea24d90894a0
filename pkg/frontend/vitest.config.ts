import { defineConfig } from "vitest/config";

// Interpreter startup dominates; give hooks and tests generous room.
export default defineConfig({
  test: {
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
