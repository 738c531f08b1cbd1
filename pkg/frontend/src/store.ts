/**
 * Session view state: the committed timeline, the latest recommendation,
 * and one optional uncommitted what-if result.  Every field is a server
 * response stored verbatim; state changes wait for the server snapshot.
 */

import { ApiClient, ApiError } from './api';
import type {
  EventInput,
  ModelStructure,
  Recommendation,
  Snapshot,
} from './types';

export interface WhatIfResult {
  event: EventInput;
  snapshot: Snapshot;
}

export interface SessionView {
  structure: ModelStructure;
  sessionId: string;
  snapshots: Snapshot[];
  recommendation: Recommendation | null;
  whatIf: WhatIfResult | null;
  error: string | null;
  disconnected: boolean;
}

type Listener = (view: SessionView) => void;

export class SessionStore {
  private view_: SessionView | null = null;
  private listeners: Listener[] = [];

  constructor(private readonly api: ApiClient) {}

  get view(): SessionView | null {
    return this.view_;
  }

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private publish(): void {
    if (this.view_ !== null) {
      for (const listener of this.listeners) listener(this.view_);
    }
  }

  /** Start a session on a model; fetches structure first for the forms. */
  async start(modelId: string): Promise<void> {
    const structure = await this.api.modelStructure(modelId);
    const created = await this.api.createSession(modelId);
    this.view_ = {
      structure,
      sessionId: created.session,
      snapshots: [created.snapshot],
      recommendation: null,
      whatIf: null,
      error: null,
      disconnected: false,
    };
    await this.refreshRecommendation();
    this.publish();
  }

  /** Commit an event: advances the timeline and refreshes recommendations. */
  async commit(event: EventInput): Promise<void> {
    const view = this.require();
    try {
      const snapshot = await this.api.postEvent(view.sessionId, event);
      view.snapshots = [...view.snapshots, snapshot];
      view.whatIf = null;
      view.error = null;
      view.disconnected = false;
      await this.refreshRecommendation();
    } catch (err) {
      this.captureError(err);
    }
    this.publish();
  }

  /** Explore an event without committing it. */
  async explore(event: EventInput): Promise<void> {
    const view = this.require();
    try {
      const snapshot = await this.api.whatIf(view.sessionId, event);
      view.whatIf = { event, snapshot };
      view.error = null;
      view.disconnected = false;
    } catch (err) {
      this.captureError(err);
    }
    this.publish();
  }

  dismissWhatIf(): void {
    const view = this.require();
    view.whatIf = null;
    this.publish();
  }

  current(): Snapshot {
    const view = this.require();
    return view.snapshots[view.snapshots.length - 1];
  }

  private async refreshRecommendation(): Promise<void> {
    const view = this.require();
    try {
      view.recommendation = await this.api.recommendations(view.sessionId);
    } catch (err) {
      this.captureError(err);
    }
  }

  private captureError(err: unknown): void {
    const view = this.require();
    if (err instanceof ApiError) {
      view.error = err.message;
    } else {
      // Network failure: surface the disconnection banner.
      view.error = 'server unreachable';
      view.disconnected = true;
    }
  }

  private require(): SessionView {
    if (this.view_ === null) {
      throw new Error('no active session');
    }
    return this.view_;
  }
}
