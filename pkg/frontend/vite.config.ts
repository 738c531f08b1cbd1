import { defineConfig } from 'vitest/config';

export default defineConfig({
  build: { target: 'es2020' },
  test: {
    environment: 'happy-dom',
    globals: true,
    include: ['tests/**/*.test.ts'],
  },
});
