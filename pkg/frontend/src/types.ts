/**
 * Typed mirrors of the monitoring API payloads (/api/v1).
 * The UI renders these verbatim; it never derives verdicts or costs.
 */

export type Verdict = 'TS' | 'TV' | 'PS' | 'PV';

export interface ComponentVerdict {
  id: string;
  verdict: Verdict;
  state: number;
}

export interface EventRecord {
  name: string;
  attrs: Record<string, number>;
}

export interface Snapshot {
  index: number;
  event: EventRecord | null;
  global: Verdict;
  components: ComponentVerdict[];
  cost_cur: number;
  cost_best: number;
  conflict: boolean;
}

export interface ModelInfo {
  id: string;
  name: string;
}

export interface AttributeSchema {
  name: string;
  labels: Record<string, number>;
}

export interface ActivitySchema {
  name: string;
  attributes: AttributeSchema[];
}

export interface ComponentInfo {
  id: string;
  kind: 'net' | 'constraint';
  cost: number;
}

export interface ModelStructure {
  id: string;
  name: string;
  components: ComponentInfo[];
  activities: ActivitySchema[];
}

export interface SessionCreated {
  session: string;
  model: string;
  snapshot: Snapshot;
}

export interface RecommendedEvent {
  activity: string;
  regions: Record<string, string>;
  sample: Record<string, number>;
  labels: Record<string, string>;
}

export interface Recommendation {
  status: 'at-best' | 'improvable';
  best_cost: number;
  events: RecommendedEvent[];
}

export interface SessionState {
  model: string;
  history: EventRecord[];
  snapshot: Snapshot;
  snapshots: Snapshot[];
}

/** Outgoing event: attribute values may be numbers or enum labels. */
export interface EventInput {
  name: string;
  attrs: Record<string, number | string>;
}
