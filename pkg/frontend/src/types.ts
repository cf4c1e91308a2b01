/** Wire types of the session service. */

export type RelationChoice = "must_link" | "cannot_link";

export interface PendingQuery {
  pair: [number, number];
  series_i: number[];
  series_j: number[];
  queries_used: number;
  budget: number;
}

export interface PhaseOnly {
  phase: string;
  queries_used?: number;
  budget?: number;
}

export type QueryPayload = PendingQuery | PhaseOnly;

export interface SuperInstanceView {
  id: number;
  members: number[];
  train_members: number[];
  representative: number;
  representative_series: number[];
}

export interface ClusterView {
  id: number;
  members: number[];
  super_instances: SuperInstanceView[];
}

export interface ClusteringPayload {
  phase: string;
  queries_used: number;
  budget: number;
  clusters: ClusterView[];
}

export interface LogEntry {
  i: number;
  j: number;
  kind: RelationChoice;
  origin: "queried" | "derived";
  sequence_number: number;
}

export function isPending(payload: QueryPayload): payload is PendingQuery {
  return (payload as PendingQuery).pair !== undefined;
}

export function validatePending(payload: unknown): PendingQuery | null {
  if (typeof payload !== "object" || payload === null) return null;
  const p = payload as Record<string, unknown>;
  if (!Array.isArray(p.pair) || p.pair.length !== 2) return null;
  if (!Array.isArray(p.series_i) || !Array.isArray(p.series_j)) return null;
  if (p.series_i.length < 2 || p.series_j.length < 2) return null;
  if (typeof p.queries_used !== "number" || typeof p.budget !== "number") return null;
  if (!p.series_i.every((v) => typeof v === "number" && isFinite(v))) return null;
  if (!p.series_j.every((v) => typeof v === "number" && isFinite(v))) return null;
  return payload as PendingQuery;
}
