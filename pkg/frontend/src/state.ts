/**
 * Session view-model: a pure assembly of server responses, so a page refresh
 * rebuilds the exact same view from GET endpoints alone.
 */

import type {
  HistoryEntry,
  HistoryResponse,
  Metrics,
  QueryCard,
  ScoreEntry,
  SessionSummary,
} from "./api.js";

export const STATUS_IDLE = "idle";
export const STATUS_AWAITING = "awaiting_label";
export const STATUS_EXHAUSTED = "budget_exhausted";

export interface SessionView {
  summary: SessionSummary;
  card: QueryCard | null;
  ranked: ScoreEntry[];
  history: HistoryEntry[];
  baseline: Metrics | null;
  /** Label buttons are usable only while a query is outstanding. */
  labelsEnabled: boolean;
  /** Scatter plot applies to 2-feature datasets only. */
  scatterEnabled: boolean;
}

export function buildView(
  summary: SessionSummary,
  scores: ScoreEntry[],
  history: HistoryResponse,
): SessionView {
  return {
    summary,
    card: summary.outstanding_query ?? null,
    ranked: scores,
    history: history.entries,
    baseline: history.baseline_metrics ?? null,
    labelsEnabled:
      summary.status === STATUS_AWAITING && summary.outstanding_query != null,
    scatterEnabled: summary.n_features === 2,
  };
}

export interface MetricSeries {
  ap: number[];
  auc: number[];
}

/**
 * Per-iteration metric curve: the baseline (unsupervised detector) first,
 * then one point per labeled iteration. Null when the session carries no
 * metric snapshots.
 */
export function metricSeries(
  history: HistoryEntry[],
  baseline: Metrics | null,
): MetricSeries | null {
  if (baseline === null) return null;
  const withMetrics = history.filter((e) => e.metrics);
  const ap = [baseline.ap, ...withMetrics.map((e) => e.metrics!.ap)];
  const auc = [baseline.auc, ...withMetrics.map((e) => e.metrics!.auc)];
  return { ap, auc };
}

export function labelCounts(history: HistoryEntry[]): {
  normal: number;
  anomaly: number;
} {
  let normal = 0;
  let anomaly = 0;
  for (const e of history) {
    if (e.label === "anomaly") anomaly += 1;
    else normal += 1;
  }
  return { normal, anomaly };
}
