import { lineChart, sharedDomain } from "./chart.js";
import type { ClusteringPayload } from "./types.js";

/**
 * Small multiples, one panel per cluster: the representative series of each
 * super-instance drawn as the cluster's prototypes, in red.
 */
export function renderClusters(payload: ClusteringPayload): string {
  if (!payload.clusters.length) {
    return `<p class="empty">no clusters yet</p>`;
  }
  const domain = sharedDomain(
    ...payload.clusters.flatMap((c) => c.super_instances.map((si) => si.representative_series)),
  );
  const panels = payload.clusters
    .map((cluster) => {
      const chart = lineChart(
        cluster.super_instances.map((si) => ({
          values: si.representative_series,
          color: "#dc2626",
          strokeWidth: 1.2,
        })),
        { domain, width: 240, height: 90 },
      );
      const size = cluster.members.length;
      const prototypes = cluster.super_instances.map((si) => si.representative).join(", ");
      return (
        `<figure class="cluster-panel" data-cluster="${cluster.id}">` +
        `<figcaption>cluster ${cluster.id} — ${size} member${size === 1 ? "" : "s"}` +
        ` <span class="prototypes">(prototypes: ${prototypes})</span></figcaption>` +
        chart +
        `</figure>`
      );
    })
    .join("");
  return `<div class="cluster-grid" data-phase="${payload.phase}">${panels}</div>`;
}
