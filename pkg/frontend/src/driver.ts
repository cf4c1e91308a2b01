import { ApiClient, ApiError } from "./api.js";
import { isPending, type QueryPayload, type RelationChoice } from "./types.js";

export type DriverEvent =
  | { kind: "query"; payload: QueryPayload }
  | { kind: "busy" }
  | { kind: "error"; message: string };

/**
 * Serializes session traffic: at most one request in flight, exactly one
 * POST per accepted user action. A 409 (stale answer) resolves by
 * refetching the current state instead of retrying.
 */
export class SessionDriver {
  private inflight = false;
  postedAnswers: Array<{ i: number; j: number; relation: RelationChoice }> = [];

  constructor(
    private readonly api: ApiClient,
    readonly sessionId: string,
  ) {}

  get busy(): boolean {
    return this.inflight;
  }

  private async exclusive<T>(task: () => Promise<T>): Promise<T | { kind: "busy" }> {
    if (this.inflight) {
      return { kind: "busy" };
    }
    this.inflight = true;
    try {
      return await task();
    } finally {
      this.inflight = false;
    }
  }

  async poll(): Promise<DriverEvent> {
    const result = await this.exclusive(async (): Promise<DriverEvent> => {
      const payload = await this.api.getQuery(this.sessionId);
      return { kind: "query", payload };
    }).catch((err) => this.asError(err));
    return result as DriverEvent;
  }

  async submit(relation: RelationChoice, pair: [number, number]): Promise<DriverEvent> {
    const result = await this.exclusive(async (): Promise<DriverEvent> => {
      try {
        const payload = await this.api.postAnswer(this.sessionId, relation);
        this.postedAnswers.push({ i: pair[0], j: pair[1], relation });
        return { kind: "query", payload };
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          const payload = await this.api.getQuery(this.sessionId);
          return { kind: "query", payload };
        }
        throw err;
      }
    }).catch((err) => this.asError(err));
    return result as DriverEvent;
  }

  async abort(): Promise<DriverEvent> {
    const result = await this.exclusive(async (): Promise<DriverEvent> => {
      const { phase } = await this.api.abortSession(this.sessionId);
      return { kind: "query", payload: { phase } };
    }).catch((err) => this.asError(err));
    return result as DriverEvent;
  }

  private asError(err: unknown): DriverEvent {
    return { kind: "error", message: err instanceof Error ? err.message : String(err) };
  }

  /** Drive a whole session with an answer policy; used by scripted tests. */
  async runScripted(
    policy: (i: number, j: number) => RelationChoice,
    onStep?: (payload: QueryPayload) => void,
    maxSteps = 500,
  ): Promise<string> {
    for (let step = 0; step < maxSteps; step++) {
      const event = await this.poll();
      if (event.kind === "error") {
        throw new Error(event.message);
      }
      if (event.kind === "busy") {
        continue;
      }
      const payload = event.payload;
      onStep?.(payload);
      if (!isPending(payload)) {
        if (payload.phase === "running" || payload.phase === "awaiting_answer") {
          await new Promise((resolve) => setTimeout(resolve, 50));
          continue;
        }
        return payload.phase;
      }
      const [i, j] = payload.pair;
      const submitted = await this.submit(policy(i, j), [i, j]);
      if (submitted.kind === "error") {
        throw new Error(submitted.message);
      }
    }
    throw new Error("session did not finish within the step limit");
  }
}
