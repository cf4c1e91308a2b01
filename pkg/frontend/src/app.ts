import { ApiClient } from "./api.js";
import { renderClusters } from "./clusterView.js";
import { SessionDriver } from "./driver.js";
import { renderQuery } from "./queryView.js";
import { isPending, type QueryPayload, type RelationChoice } from "./types.js";

const POLL_INTERVAL_MS = 1000;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

class ConsoleApp {
  private api = new ApiClient("");
  private driver: SessionDriver | null = null;
  private pair: [number, number] | null = null;
  private timer: number | null = null;

  async start(): Promise<void> {
    const datasets = await this.api.listDatasets();
    const select = el<HTMLSelectElement>("dataset-select");
    select.innerHTML = datasets.datasets
      .map((name) => `<option value="${name}">${name}</option>`)
      .join("");

    el<HTMLButtonElement>("start-button").addEventListener("click", () => this.openSession());
    el<HTMLButtonElement>("must-link").addEventListener("click", () => this.answer("must_link"));
    el<HTMLButtonElement>("cannot-link").addEventListener("click", () => this.answer("cannot_link"));
    el<HTMLButtonElement>("abort-button").addEventListener("click", () => this.abort());
    document.addEventListener("keydown", (event) => {
      if (event.key === "m") this.answer("must_link");
      if (event.key === "c") this.answer("cannot_link");
    });
  }

  private async openSession(): Promise<void> {
    const dataset = el<HTMLSelectElement>("dataset-select").value;
    const budget = Number(el<HTMLInputElement>("budget-input").value) || 50;
    const refiner = el<HTMLSelectElement>("refiner-select").value;
    const created = await this.api.createSession(dataset, { budget, refiner });
    this.driver = new SessionDriver(this.api, created.session_id);
    el("session-label").textContent = `session ${created.session_id}`;
    if (this.timer !== null) clearInterval(this.timer);
    this.timer = setInterval(() => this.tick(), POLL_INTERVAL_MS) as unknown as number;
    await this.tick();
  }

  private async tick(): Promise<void> {
    if (!this.driver || this.driver.busy) return;
    const event = await this.driver.poll();
    if (event.kind === "query") {
      this.applyQuery(event.payload);
      await this.refreshClusters();
    }
  }

  private applyQuery(payload: QueryPayload): void {
    const view = renderQuery(payload);
    el("query-container").innerHTML = view.html;
    this.pair = view.pair;
    this.setAnswersEnabled(view.answersEnabled);
    if (!isPending(payload) && payload.phase && payload.phase !== "running"
        && payload.phase !== "awaiting_answer" && this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  private setAnswersEnabled(enabled: boolean): void {
    el<HTMLButtonElement>("must-link").disabled = !enabled;
    el<HTMLButtonElement>("cannot-link").disabled = !enabled;
  }

  private async answer(relation: RelationChoice): Promise<void> {
    if (!this.driver || !this.pair || this.driver.busy) return;
    const pair = this.pair;
    this.pair = null;
    this.setAnswersEnabled(false);
    const event = await this.driver.submit(relation, pair);
    if (event.kind === "query") {
      this.applyQuery(event.payload);
      await this.refreshClusters();
    }
  }

  private async abort(): Promise<void> {
    if (!this.driver) return;
    const event = await this.driver.abort();
    if (event.kind === "query") {
      this.applyQuery(event.payload);
      await this.refreshClusters();
    }
  }

  private async refreshClusters(): Promise<void> {
    if (!this.driver) return;
    const clustering = await this.api.getClustering(this.driver.sessionId);
    el("cluster-container").innerHTML = renderClusters(clustering);
  }
}

new ConsoleApp().start().catch((err) => {
  document.body.insertAdjacentHTML(
    "afterbegin",
    `<div class="error-banner">failed to start: ${err instanceof Error ? err.message : err}</div>`,
  );
});
