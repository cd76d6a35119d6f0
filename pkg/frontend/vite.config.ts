import { defineConfig } from "vitest/config";

// In dev mode the segment server runs separately; proxy API calls to it so
// the client can be served with hot reload from vite. Production builds are
// served by the segment server itself via its --static flag.
export default defineConfig({
  base: "./",
  server: {
    proxy: {
      "/api": {
        target: process.env.NAVSEG_SERVER ?? "http://127.0.0.1:8080",
        changeOrigin: true,
      },
    },
  },
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    testTimeout: 120_000,
    hookTimeout: 300_000,
    globalSetup: "tests/global_setup.ts",
    pool: "forks",
  },
});
