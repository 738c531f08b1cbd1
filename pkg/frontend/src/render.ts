/**
 * DOM rendering of a session view.  Every displayed figure is copied
 * from a server response field; this module formats, it never computes.
 */

import { validateEventForm } from './form';
import type { SessionView } from './store';
import type {
  ActivitySchema,
  EventInput,
  EventRecord,
  RecommendedEvent,
  Snapshot,
} from './types';

export interface RenderCallbacks {
  onCommit(event: EventInput): void;
  onWhatIf(event: EventInput): void;
  onDismissWhatIf(): void;
  onPrefill(recommended: RecommendedEvent): void;
}

export function describeEvent(event: EventRecord | EventInput | null): string {
  if (event === null) return 'session start';
  const attrs = Object.entries(event.attrs)
    .map(([key, value]) => `${key}=${value}`)
    .join(', ');
  return attrs ? `${event.name}(${attrs})` : event.name;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function verdictBadge(doc: Document, id: string, verdict: string): HTMLElement {
  const badge = el(doc, 'span', `badge verdict-${verdict}`, `${id}: ${verdict}`);
  badge.dataset.component = id;
  badge.dataset.verdict = verdict;
  return badge;
}

function snapshotBadges(doc: Document, snapshot: Snapshot): HTMLElement {
  const row = el(doc, 'div', 'badges');
  for (const component of snapshot.components) {
    row.appendChild(verdictBadge(doc, component.id, component.verdict));
  }
  row.appendChild(verdictBadge(doc, 'global', snapshot.global));
  return row;
}

export function renderSession(
  root: HTMLElement,
  view: SessionView,
  callbacks: RenderCallbacks,
  prefill: EventInput | null = null,
): void {
  const doc = root.ownerDocument;
  root.textContent = '';
  const current = view.snapshots[view.snapshots.length - 1];

  if (view.disconnected) {
    root.appendChild(el(doc, 'div', 'banner disconnected', 'server unreachable — reconnect to continue'));
  } else if (view.error) {
    root.appendChild(el(doc, 'div', 'banner error', view.error));
  }
  if (current.conflict) {
    root.appendChild(
      el(
        doc,
        'div',
        'banner conflict',
        'Conflict: every continuation now violates some component',
      ),
    );
  }

  // Current verdicts and cost panel.
  const status = el(doc, 'section', 'status');
  status.appendChild(el(doc, 'h2', undefined, view.structure.name));
  status.appendChild(snapshotBadges(doc, current));
  const costs = el(doc, 'div', 'costs');
  const costCur = el(doc, 'span', 'cost-cur', String(current.cost_cur));
  const costBest = el(doc, 'span', 'cost-best', String(current.cost_best));
  costs.appendChild(el(doc, 'span', undefined, 'current violation cost '));
  costs.appendChild(costCur);
  costs.appendChild(el(doc, 'span', undefined, ' · best achievable '));
  costs.appendChild(costBest);
  status.appendChild(costs);
  root.appendChild(status);

  // Committed timeline.
  const timeline = el(doc, 'section', 'timeline');
  timeline.appendChild(el(doc, 'h3', undefined, 'Timeline'));
  const list = el(doc, 'ol');
  for (const snapshot of view.snapshots) {
    const item = el(doc, 'li', snapshot.conflict ? 'step conflict-step' : 'step');
    item.appendChild(el(doc, 'span', 'step-event', describeEvent(snapshot.event)));
    item.appendChild(snapshotBadges(doc, snapshot));
    list.appendChild(item);
  }
  timeline.appendChild(list);
  root.appendChild(timeline);

  // What-if result, visually separated from committed steps.
  if (view.whatIf !== null) {
    const panel = el(doc, 'section', 'what-if');
    panel.appendChild(
      el(doc, 'h3', undefined, `What if: ${describeEvent(view.whatIf.event)}`),
    );
    panel.appendChild(snapshotBadges(doc, view.whatIf.snapshot));
    panel.appendChild(
      el(
        doc,
        'div',
        'costs',
        `would make current cost ${view.whatIf.snapshot.cost_cur}, ` +
          `best achievable ${view.whatIf.snapshot.cost_best}`,
      ),
    );
    const dismiss = el(doc, 'button', 'dismiss', 'dismiss');
    dismiss.addEventListener('click', () => callbacks.onDismissWhatIf());
    panel.appendChild(dismiss);
    root.appendChild(panel);
  }

  // Recommendations.
  const recommendations = el(doc, 'section', 'recommendations');
  recommendations.appendChild(el(doc, 'h3', undefined, 'Best next events'));
  if (view.recommendation === null) {
    recommendations.appendChild(el(doc, 'p', undefined, 'no recommendation yet'));
  } else if (view.recommendation.status === 'at-best') {
    recommendations.appendChild(
      el(
        doc,
        'p',
        'at-best',
        `already at the best achievable cost (${view.recommendation.best_cost})`,
      ),
    );
  } else {
    recommendations.appendChild(
      el(
        doc,
        'p',
        'improvable',
        `best achievable cost ${view.recommendation.best_cost} via:`,
      ),
    );
    const options = el(doc, 'ul', 'recommendation-list');
    for (const recommended of view.recommendation.events) {
      const item = el(doc, 'li', 'recommended');
      item.appendChild(
        el(doc, 'span', 'recommended-event', formatRecommendation(recommended)),
      );
      const use = el(doc, 'button', 'prefill', 'use');
      use.addEventListener('click', () => callbacks.onPrefill(recommended));
      item.appendChild(use);
      options.appendChild(item);
    }
    recommendations.appendChild(options);
  }
  root.appendChild(recommendations);

  root.appendChild(renderEventForm(doc, view, callbacks, prefill));
}

export function formatRecommendation(recommended: RecommendedEvent): string {
  const parts = Object.entries(recommended.regions).map(([attr, region]) => {
    const label = recommended.labels[attr];
    return label !== undefined ? `${attr} ∈ ${region} (${label})` : `${attr} ∈ ${region}`;
  });
  return parts.length > 0
    ? `${recommended.activity} with ${parts.join(', ')}`
    : recommended.activity;
}

function renderEventForm(
  doc: Document,
  view: SessionView,
  callbacks: RenderCallbacks,
  prefill: EventInput | null,
): HTMLElement {
  const section = el(doc, 'section', 'event-form');
  section.appendChild(el(doc, 'h3', undefined, 'Next event'));
  const picker = el(doc, 'select', 'activity-picker');
  for (const activity of view.structure.activities) {
    const option = el(doc, 'option', undefined, activity.name);
    option.value = activity.name;
    picker.appendChild(option);
  }
  section.appendChild(picker);
  const fields = el(doc, 'div', 'fields');
  section.appendChild(fields);
  const issues = el(doc, 'div', 'issues');
  section.appendChild(issues);

  const activityByName = new Map(
    view.structure.activities.map((a) => [a.name, a]),
  );

  function renderFields(activity: ActivitySchema, preset?: EventInput): void {
    fields.textContent = '';
    for (const attribute of activity.attributes) {
      const wrap = el(doc, 'label', 'field', `${attribute.name} `);
      const presetValue =
        preset && attribute.name in preset.attrs
          ? String(preset.attrs[attribute.name])
          : undefined;
      const labels = Object.keys(attribute.labels);
      if (labels.length > 0) {
        const select = el(doc, 'select', 'attr-input');
        select.dataset.attribute = attribute.name;
        for (const label of labels) {
          const option = el(doc, 'option', undefined, label);
          option.value = label;
          select.appendChild(option);
        }
        if (presetValue !== undefined) select.value = presetValue;
        wrap.appendChild(select);
      } else {
        const input = el(doc, 'input', 'attr-input');
        input.dataset.attribute = attribute.name;
        input.type = 'text';
        if (presetValue !== undefined) input.value = presetValue;
        wrap.appendChild(input);
      }
      fields.appendChild(wrap);
    }
  }

  picker.addEventListener('change', () => {
    const activity = activityByName.get(picker.value);
    if (activity) renderFields(activity);
    issues.textContent = '';
  });
  const initial =
    (prefill && activityByName.get(prefill.name)) ?? view.structure.activities[0];
  picker.value = initial.name;
  renderFields(initial, prefill ?? undefined);

  function collect(): { activity: ActivitySchema; values: Record<string, string> } {
    const activity = activityByName.get(picker.value)!;
    const values: Record<string, string> = {};
    fields.querySelectorAll<HTMLElement>('.attr-input').forEach((node) => {
      const attr = node.dataset.attribute!;
      values[attr] = (node as HTMLInputElement | HTMLSelectElement).value;
    });
    return { activity, values };
  }

  function submit(kind: 'commit' | 'what-if'): void {
    // Validation is client-side only to avoid sending garbage; verdicts
    // and costs always come from the server.
    const { activity, values } = collect();
    issues.textContent = '';
    const result = validateEventForm(activity, values);
    if (result.event === null) {
      for (const issue of result.issues) {
        issues.appendChild(
          el(doc, 'p', 'issue', `${issue.attribute}: ${issue.message}`),
        );
      }
      return;
    }
    if (kind === 'commit') callbacks.onCommit(result.event);
    else callbacks.onWhatIf(result.event);
  }

  const whatIfButton = el(doc, 'button', 'try', 'what if?');
  whatIfButton.addEventListener('click', () => submit('what-if'));
  const commitButton = el(doc, 'button', 'commit', 'commit event');
  commitButton.addEventListener('click', () => submit('commit'));
  section.appendChild(whatIfButton);
  section.appendChild(commitButton);
  return section;
}
