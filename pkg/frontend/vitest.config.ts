import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node", // DOM comes from tests/dom.ts so node fetch/FormData stay native
    globalSetup: ["tests/fixture-server.ts"],
    setupFiles: ["tests/dom.ts"],
    include: ["tests/**/*.test.ts"],
    testTimeout: 20000,
    hookTimeout: 60000,
  },
});
