/**
 * Bootstrap: model picker, session start, and re-render on store changes.
 */

import { ApiClient } from './api';
import { renderSession } from './render';
import { SessionStore } from './store';
import type { EventInput, RecommendedEvent } from './types';

export function prefillFromRecommendation(recommended: RecommendedEvent): EventInput {
  const attrs: Record<string, number | string> = {};
  for (const [attr, value] of Object.entries(recommended.sample)) {
    attrs[attr] = recommended.labels[attr] ?? value;
  }
  return { name: recommended.activity, attrs };
}

export async function bootstrap(root: HTMLElement, api = new ApiClient()): Promise<void> {
  const doc = root.ownerDocument;
  const store = new SessionStore(api);
  let prefill: EventInput | null = null;

  const sessionRoot = doc.createElement('div');
  sessionRoot.id = 'session';

  const redraw = () => {
    const view = store.view;
    if (view === null) return;
    renderSession(
      sessionRoot,
      view,
      {
        onCommit: (event) => {
          prefill = null;
          void store.commit(event);
        },
        onWhatIf: (event) => {
          void store.explore(event);
        },
        onDismissWhatIf: () => store.dismissWhatIf(),
        onPrefill: (recommended) => {
          prefill = prefillFromRecommendation(recommended);
          redraw();
        },
      },
      prefill,
    );
  };
  store.subscribe(redraw);

  const header = doc.createElement('header');
  const title = doc.createElement('h1');
  title.textContent = 'hybrid process monitor';
  header.appendChild(title);
  const picker = doc.createElement('select');
  picker.id = 'model-picker';
  const start = doc.createElement('button');
  start.id = 'start-session';
  start.textContent = 'start session';
  start.addEventListener('click', () => {
    void store.start(picker.value);
  });
  header.appendChild(picker);
  header.appendChild(start);
  root.textContent = '';
  root.appendChild(header);
  root.appendChild(sessionRoot);

  const models = await api.listModels();
  for (const model of models) {
    const option = doc.createElement('option');
    option.value = model.id;
    option.textContent = model.name;
    picker.appendChild(option);
  }
}

declare global {
  interface Window {
    __HYBRIDMON_NO_AUTOSTART__?: boolean;
  }
}

if (typeof window !== 'undefined' && !window.__HYBRIDMON_NO_AUTOSTART__) {
  const root = document.getElementById('app');
  if (root) void bootstrap(root);
}
