// Plain object config (no vitest/config import) so the globally installed
// vitest runner works without a local node_modules tree.
export default {
  test: {
    environment: "node",
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
};
