/**
 * Drives the sequential query/label loop against the service. The server is
 * authoritative: every mutation is followed by a full view rebuild from GET
 * endpoints, and label submissions are suppressed while one is in flight.
 */

import { ApiError, SessionApi } from "./api.js";
import { buildView, STATUS_IDLE } from "./state.js";
import type { SessionView } from "./state.js";

export type Verdict = "normal" | "anomaly" | "skip";

export class SessionController {
  view: SessionView | null = null;
  banner: string | null = null;
  autoAdvance = true;
  private busy = false;

  constructor(
    private api: SessionApi,
    readonly sessionId: string,
    private onChange: (c: SessionController) => void = () => {},
  ) {}

  /** Rebuild the whole view from server state (also the refresh path). */
  async refresh(): Promise<void> {
    const summary = await this.api.summary(this.sessionId);
    const scores = await this.api.scores(
      this.sessionId,
      undefined,
      summary.n_features === 2,
    );
    const history = await this.api.history(this.sessionId);
    this.view = buildView(summary, scores.scores, history);
    this.onChange(this);
  }

  get labelsEnabled(): boolean {
    return !this.busy && this.view !== null && this.view.labelsEnabled;
  }

  async nextQuery(): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    this.banner = null;
    try {
      await this.api.requestQuery(this.sessionId);
    } catch (err) {
      this.surface(err);
    } finally {
      this.busy = false;
    }
    await this.refresh();
  }

  async submit(verdict: Verdict): Promise<void> {
    if (this.busy) return; // second click of a double-click lands here
    const card = this.view?.card;
    if (!card || !this.view?.labelsEnabled) return;
    this.busy = true;
    this.banner = null;
    try {
      if (verdict === "skip") {
        await this.api.abstain(this.sessionId, card.point_index);
      } else {
        await this.api.submitLabel(this.sessionId, card.point_index, verdict);
      }
    } catch (err) {
      this.surface(err);
    } finally {
      this.busy = false;
    }
    await this.refresh();
    if (
      verdict !== "skip" &&
      this.autoAdvance &&
      this.view?.summary.status === STATUS_IDLE
    ) {
      await this.nextQuery();
    }
  }

  private surface(err: unknown): void {
    if (err instanceof ApiError) {
      this.banner =
        err.status === 410
          ? "Budget exhausted — no further queries."
          : `Server rejected the request (${err.status}): ${err.message}`;
    } else {
      this.banner = `Network failure: ${String(err)} — state unchanged, retry.`;
    }
  }
}
