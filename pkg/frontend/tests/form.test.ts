import { describe, expect, it } from 'vitest';

import { validateEventForm } from '../src/form';
import type { ActivitySchema } from '../src/types';

const withEnum: ActivitySchema = {
  name: 'HPev',
  attributes: [{ name: 'result', labels: { pos: 1, neg: 0 } }],
};

const numeric: ActivitySchema = {
  name: 'measure',
  attributes: [{ name: 'z', labels: {} }],
};

const plain: ActivitySchema = { name: 'AT', attributes: [] };

describe('validateEventForm', () => {
  it('accepts enum labels verbatim', () => {
    const result = validateEventForm(withEnum, { result: 'pos' });
    expect(result.issues).toEqual([]);
    expect(result.event).toEqual({ name: 'HPev', attrs: { result: 'pos' } });
  });

  it('accepts finite numbers', () => {
    const result = validateEventForm(numeric, { z: '10.5' });
    expect(result.event).toEqual({ name: 'measure', attrs: { z: 10.5 } });
  });

  it('produces no event on invalid input', () => {
    const result = validateEventForm(numeric, { z: 'eleven' });
    expect(result.event).toBeNull();
    expect(result.issues).toHaveLength(1);
    expect(result.issues[0].attribute).toBe('z');
  });

  it('requires every attribute', () => {
    const result = validateEventForm(withEnum, {});
    expect(result.event).toBeNull();
    expect(result.issues[0].message).toBe('value required');
  });

  it('rejects non-label strings when labels exist', () => {
    const result = validateEventForm(withEnum, { result: 'maybe' });
    expect(result.event).toBeNull();
    expect(result.issues[0].message).toContain('pos');
  });

  it('handles attribute-free activities', () => {
    const result = validateEventForm(plain, {});
    expect(result.event).toEqual({ name: 'AT', attrs: {} });
  });
});
