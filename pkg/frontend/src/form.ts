/**
 * Event-entry form model: raw input strings validated against the
 * activity's attribute schema before any request is sent.
 */

import type { ActivitySchema, EventInput } from './types';

export interface FormIssue {
  attribute: string;
  message: string;
}

export interface FormResult {
  event: EventInput | null;
  issues: FormIssue[];
}

/**
 * Validate raw form values for one activity.  Every attribute needs a
 * value that is either a finite number or one of its enum labels; on any
 * issue no event is produced.
 */
export function validateEventForm(
  activity: ActivitySchema,
  values: Record<string, string>,
): FormResult {
  const issues: FormIssue[] = [];
  const attrs: Record<string, number | string> = {};
  for (const attribute of activity.attributes) {
    const raw = (values[attribute.name] ?? '').trim();
    if (raw === '') {
      issues.push({ attribute: attribute.name, message: 'value required' });
      continue;
    }
    if (Object.prototype.hasOwnProperty.call(attribute.labels, raw)) {
      attrs[attribute.name] = raw;
      continue;
    }
    const numeric = Number(raw);
    if (!Number.isFinite(numeric)) {
      const labels = Object.keys(attribute.labels);
      const hint = labels.length > 0 ? ` or one of: ${labels.join(', ')}` : '';
      issues.push({
        attribute: attribute.name,
        message: `must be a finite number${hint}`,
      });
      continue;
    }
    attrs[attribute.name] = numeric;
  }
  if (issues.length > 0) {
    return { event: null, issues };
  }
  return { event: { name: activity.name, attrs }, issues: [] };
}
