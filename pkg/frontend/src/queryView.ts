import { lineChart, sharedDomain } from "./chart.js";
import { isPending, validatePending, type QueryPayload } from "./types.js";

export interface QueryViewState {
  html: string;
  answersEnabled: boolean;
  pair: [number, number] | null;
  phase: string | null;
}

export function budgetGauge(used: number, budget: number): string {
  const pct = budget > 0 ? Math.min(100, (used / budget) * 100) : 0;
  return `<div class="gauge" data-used="${used}" data-budget="${budget}">` +
    `<div class="gauge-bar"><div class="gauge-fill" style="width:${pct.toFixed(1)}%"></div></div>` +
    `<span class="gauge-text">${used} / ${budget} queries</span></div>`;
}

/**
 * Render the pending query: two charts on one y-scale, the budget gauge,
 * and the answer buttons. Malformed payloads render an error banner with
 * the buttons disabled; phase-only payloads render the waiting state.
 */
export function renderQuery(payload: QueryPayload | unknown): QueryViewState {
  const asQuery = payload as QueryPayload;
  if (asQuery && typeof asQuery === "object" && !isPending(asQuery)) {
    const phase = (asQuery as { phase?: string }).phase ?? "unknown";
    const used = (asQuery as { queries_used?: number }).queries_used ?? 0;
    const budget = (asQuery as { budget?: number }).budget ?? 0;
    const label = phase === "running" || phase === "awaiting_answer"
      ? "waiting for the engine…" : `session ${phase}`;
    return {
      html: `<div class="query-idle">${budgetGauge(used, budget)}<p class="phase">${label}</p></div>`,
      answersEnabled: false,
      pair: null,
      phase,
    };
  }

  const pending = validatePending(payload);
  if (pending === null) {
    return {
      html: `<div class="error-banner" role="alert">malformed query payload</div>`,
      answersEnabled: false,
      pair: null,
      phase: null,
    };
  }

  const domain = sharedDomain(pending.series_i, pending.series_j);
  const [i, j] = pending.pair;
  const chartA = lineChart([{ values: pending.series_i }], { domain });
  const chartB = lineChart([{ values: pending.series_j, color: "#059669" }], { domain });
  const html =
    `<div class="query-view">` +
    budgetGauge(pending.queries_used, pending.budget) +
    `<p class="question">Should these two series be in the same cluster?</p>` +
    `<figure class="series" data-series="i"><figcaption>series #${i}</figcaption>${chartA}</figure>` +
    `<figure class="series" data-series="j"><figcaption>series #${j}</figcaption>${chartB}</figure>` +
    `</div>`;
  return { html, answersEnabled: true, pair: [i, j], phase: null };
}
