/**
 * Scripted run of the clinical scenario against recorded server
 * responses (frontend/tests/fixtures/scenario.json, captured from the
 * real service).  Drives the actual bootstrap/store/render code through
 * the DOM and checks that everything on screen is a verbatim server
 * field: verdict badges, the conflict banner at step 3, the cost panel,
 * and the best-next-event list that excludes the warfarin-first path.
 */

import { beforeEach, describe, expect, it, vi } from 'vitest';

import { ApiClient } from '../src/api';
import { bootstrap } from '../src/main';
import type { Recommendation, Snapshot } from '../src/types';
import { ScriptedServer, type RecordedExchange } from './mockserver';
import script from './fixtures/scenario.json';

const exchanges = script as RecordedExchange[];

function freshRoot(): HTMLElement {
  document.body.innerHTML = '<div id="app"></div>';
  return document.getElementById('app') as HTMLElement;
}

async function startSession(root: HTMLElement, server: ScriptedServer) {
  await bootstrap(root, new ApiClient(server.fetch));
  (root.querySelector('#start-session') as HTMLButtonElement).click();
  await vi.waitFor(() => {
    expect(root.querySelector('.timeline ol li')).not.toBeNull();
  });
}

function setForm(root: HTMLElement, name: string, attrs: Record<string, string>) {
  const picker = root.querySelector('.activity-picker') as HTMLSelectElement;
  picker.value = name;
  picker.dispatchEvent(new Event('change'));
  for (const [attr, value] of Object.entries(attrs)) {
    const input = root.querySelector(
      `.attr-input[data-attribute="${attr}"]`,
    ) as HTMLInputElement | HTMLSelectElement;
    input.value = value;
  }
}

function timelineSteps(root: HTMLElement): Element[] {
  return Array.from(root.querySelectorAll('.timeline ol li'));
}

async function commit(root: HTMLElement, name: string, attrs: Record<string, string> = {}) {
  const before = timelineSteps(root).length;
  setForm(root, name, attrs);
  (root.querySelector('button.commit') as HTMLButtonElement).click();
  await vi.waitFor(() => {
    expect(timelineSteps(root).length).toBe(before + 1);
  });
}

function statusBadge(root: HTMLElement, component: string): HTMLElement {
  const badge = root.querySelector(
    `.status .badges [data-component="${component}"]`,
  ) as HTMLElement;
  expect(badge).not.toBeNull();
  return badge;
}

describe('scenario walkthrough', () => {
  beforeEach(() => {
    document.body.innerHTML = '';
  });

  it('reproduces the recorded verdicts, conflict and recommendations', async () => {
    const server = new ScriptedServer(exchanges);
    const root = freshRoot();
    await startSession(root, server);

    // No conflict at the start; the session opens temporarily violated,
    // exactly as the server said.
    const initial = (server.lastResponse('POST', '/sessions') as { snapshot: Snapshot })
      .snapshot;
    expect(statusBadge(root, 'global').dataset.verdict).toBe(initial.global);
    expect(root.querySelector('.banner.conflict')).toBeNull();

    await commit(root, 'HPte');
    await commit(root, 'HPev', { result: 'pos' });
    await commit(root, 'IntD', { type: 'anticoag' });

    // Step 3: the early-detected conflict.  Every displayed figure must
    // equal the corresponding field of the snapshot the server returned.
    const conflictSnapshot = (
      server.lastResponse('POST', '/events') as { snapshot: Snapshot }
    ).snapshot;
    expect(conflictSnapshot.index).toBe(3);
    expect(conflictSnapshot.conflict).toBe(true);
    expect(root.querySelector('.banner.conflict')).not.toBeNull();
    expect(statusBadge(root, 'global').dataset.verdict).toBe(conflictSnapshot.global);
    for (const component of conflictSnapshot.components) {
      expect(statusBadge(root, component.id).dataset.verdict).toBe(component.verdict);
      expect(component.verdict).not.toBe('PV'); // conflict, not local violation
    }
    expect(root.querySelector('.cost-cur')!.textContent).toBe(
      String(conflictSnapshot.cost_cur),
    );
    expect(root.querySelector('.cost-best')!.textContent).toBe(
      String(conflictSnapshot.cost_best),
    );
    expect(conflictSnapshot.cost_best).toBe(2);

    // Recommendation panel: the server's cost-2 continuation, rendered
    // one entry per recommended abstract event; warfarin first is absent.
    const recommendation = server.lastResponse(
      'GET',
      '/recommendations',
    ) as Recommendation;
    expect(recommendation.best_cost).toBe(2);
    const entries = Array.from(
      root.querySelectorAll('.recommendation-list .recommended-event'),
    ).map((node) => node.textContent ?? '');
    expect(entries).toHaveLength(recommendation.events.length);
    const activities = new Set(recommendation.events.map((e) => e.activity));
    expect(activities.has('AT')).toBe(true);
    expect(activities.has('WT')).toBe(false);
    expect(entries.some((text) => text.startsWith('AT'))).toBe(true);
    expect(entries.every((text) => !text.startsWith('WT'))).toBe(true);
    expect(
      root.querySelector('.recommendations .improvable')!.textContent,
    ).toContain(String(recommendation.best_cost));

    // What-if warfarin: a prospective panel appears, visually separate,
    // showing the server's speculative snapshot; the timeline stays at 4
    // entries (initial + three events).
    setForm(root, 'WT', {});
    (root.querySelector('button.try') as HTMLButtonElement).click();
    await vi.waitFor(() => {
      expect(root.querySelector('.what-if')).not.toBeNull();
    });
    const whatIf = (server.lastResponse('POST', '/what-if') as { snapshot: Snapshot })
      .snapshot;
    const whatIfBadge = root.querySelector(
      '.what-if [data-component="global"]',
    ) as HTMLElement;
    expect(whatIfBadge.dataset.verdict).toBe(whatIf.global);
    expect(root.querySelector('.what-if .costs')!.textContent).toContain(
      String(whatIf.cost_best),
    );
    expect(timelineSteps(root).length).toBe(4);

    // Committing the clinician's actual choice: warfarin anyway, then
    // the ulcer branch; the final screen mirrors the replay report.
    await commit(root, 'WT');
    await commit(root, 'AT');
    await commit(root, 'PUev');
    const finalSnapshot = (
      server.lastResponse('POST', '/events') as { snapshot: Snapshot }
    ).snapshot;
    expect(finalSnapshot.cost_cur).toBe(10);
    expect(root.querySelector('.cost-cur')!.textContent).toBe(
      String(finalSnapshot.cost_cur),
    );
    const verdicts = Object.fromEntries(
      finalSnapshot.components.map((c) => [c.id, c.verdict]),
    );
    expect(verdicts).toEqual({ PU: 'TS', VT: 'TS', C: 'PV' });
    for (const component of finalSnapshot.components) {
      expect(statusBadge(root, component.id).dataset.verdict).toBe(component.verdict);
    }
    // Conflict step stays highlighted at index 3 of the timeline.
    const steps = timelineSteps(root);
    expect(steps).toHaveLength(7);
    expect(steps[3].className).toContain('conflict-step');
    expect(server.exhausted).toBe(true);
  });

  it('renders tampered server figures verbatim (no local computation)', async () => {
    // If the UI recomputed any verdict or cost, a tampered server value
    // would disagree with the screen.  Tamper and expect the screen to
    // follow the server.
    const tampered: RecordedExchange[] = JSON.parse(JSON.stringify(exchanges.slice(0, 4)));
    const created = tampered[2].response as { snapshot: Snapshot };
    created.snapshot.cost_best = 41;
    created.snapshot.global = 'TS';
    created.snapshot.components = created.snapshot.components.map((c) => ({
      ...c,
      verdict: 'PS' as const,
    }));
    const server = new ScriptedServer(tampered);
    const root = freshRoot();
    await startSession(root, server);
    expect(root.querySelector('.cost-best')!.textContent).toBe('41');
    expect(statusBadge(root, 'global').dataset.verdict).toBe('TS');
    expect(statusBadge(root, 'PU').dataset.verdict).toBe('PS');
  });

  it('blocks invalid attribute input before any request', async () => {
    const structure = {
      id: 'tiny',
      name: 'tiny',
      components: [{ id: 'c', kind: 'constraint', cost: 1 }],
      activities: [
        { name: 'measure', attributes: [{ name: 'z', labels: {} }] },
      ],
    };
    const snapshot: Snapshot = {
      index: 0,
      event: null,
      global: 'TS',
      components: [{ id: 'c', verdict: 'TS', state: 0 }],
      cost_cur: 0,
      cost_best: 0,
      conflict: false,
    };
    const recommendation: Recommendation = { status: 'at-best', best_cost: 0, events: [] };
    const server = new ScriptedServer([
      { method: 'GET', path: '/api/v1/models', body: null, status: 200, response: [{ id: 'tiny', name: 'tiny' }] },
      { method: 'GET', path: '/api/v1/models/tiny/structure', body: null, status: 200, response: structure },
      { method: 'POST', path: '/api/v1/sessions', body: { model: 'tiny' }, status: 201, response: { session: 's', model: 'tiny', snapshot } },
      { method: 'GET', path: '/api/v1/sessions/s/recommendations', body: null, status: 200, response: recommendation },
    ]);
    const root = freshRoot();
    await startSession(root, server);
    expect(server.exhausted).toBe(true); // script consumed up to here
    setForm(root, 'measure', { z: 'eleven' });
    (root.querySelector('button.commit') as HTMLButtonElement).click();
    await vi.waitFor(() => {
      expect(root.querySelector('.issues .issue')).not.toBeNull();
    });
    // Any further request would run past the script and throw inside the
    // store, surfacing as an error banner; its absence proves none left.
    expect(root.querySelector('.issues .issue')!.textContent).toContain('z');
    expect(timelineSteps(root).length).toBe(1);
    expect(root.querySelector('.banner.error')).toBeNull();
  });
});
