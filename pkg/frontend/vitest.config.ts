import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    environment: 'happy-dom',
    environmentOptions: {
      happyDOM: {
        settings: { disableCSSFileLoading: true, disableJavaScriptFileLoading: true },
      },
    },
    include: ['tests/**/*.test.ts'],
    globalSetup: ['tests/server.setup.ts'],
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
