import { describe, expect, it } from "vitest";

import type { QueryCard, ScoreEntry } from "../src/api.js";
import {
  renderHistory,
  renderQueryCard,
  renderRankedList,
  renderScatter,
  sparkline,
} from "../src/render.js";
import { buildView } from "../src/state.js";
import type { SessionSummary } from "../src/api.js";

const card: QueryCard = {
  point_index: 7,
  features: [1.25, -0.5],
  score: 0.63,
  mean_depth: 4.2,
  uncertainty: 0.9,
  rank: 1,
  pool_size: 50,
  budget_left: 10,
  feature_percentiles: [0.75, 0.25],
};

function summary(overrides: Partial<SessionSummary> = {}): SessionSummary {
  return {
    session_id: "s",
    status: "idle",
    budget: 25,
    budget_used: 0,
    pool_size: 50,
    n_train: 50,
    n_features: 2,
    query_strategy: "most_anomalous",
    update_strategy: "piecewise_linear",
    outstanding: null,
    has_eval: false,
    ...overrides,
  };
}

describe("renderQueryCard", () => {
  it("disables verdict buttons unless awaiting a label", () => {
    const awaiting = buildView(
      summary({ status: "awaiting_label", outstanding: 7, outstanding_query: card }),
      [],
      { status: "awaiting_label", entries: [] },
    );
    const html = renderQueryCard(awaiting);
    expect(html).toContain('data-verdict="anomaly"');
    expect(html).not.toContain("disabled");

    // same card data but a stale/idle status must not offer buttons
    const stale = { ...awaiting, labelsEnabled: false };
    expect(renderQueryCard(stale)).toContain("disabled");
  });

  it("offers a request button when idle and hides everything when exhausted", () => {
    const idle = buildView(summary(), [], { status: "idle", entries: [] });
    expect(renderQueryCard(idle)).toContain("next-query");

    const done = buildView(summary({ status: "budget_exhausted" }), [], {
      status: "budget_exhausted",
      entries: [],
    });
    const html = renderQueryCard(done);
    expect(html).toContain("Budget exhausted");
    expect(html).not.toContain("data-verdict");
  });

  it("shows every feature with its training percentile", () => {
    const awaiting = buildView(
      summary({ status: "awaiting_label", outstanding: 7, outstanding_query: card }),
      [],
      { status: "awaiting_label", entries: [] },
    );
    const html = renderQueryCard(awaiting);
    expect(html).toContain("1.2500");
    expect(html).toContain("75%");
    expect(html).toContain("25%");
  });
});

describe("renderHistory", () => {
  it("placeholder when empty", () => {
    expect(renderHistory([], null)).toContain("No labels yet");
  });

  it("renders a 26-point curve for 25 oracle-labeled iterations", () => {
    const entries = Array.from({ length: 25 }, (_, i) => ({
      iteration: i + 1,
      index: i,
      label: "anomaly",
      metrics: { ap: 0.2 + i * 0.02, auc: 0.6 },
    }));
    const html = renderHistory(entries, { ap: 0.1, auc: 0.5 });
    const points = html.match(/points="([^"]+)"/)![1].trim().split(/\s+/);
    expect(points).toHaveLength(26);
  });

  it("falls back to per-class counters without metrics", () => {
    const html = renderHistory(
      [
        { iteration: 1, index: 3, label: "anomaly" },
        { iteration: 2, index: 5, label: "normal" },
      ],
      null,
    );
    expect(html).toContain("1 anomalies");
    expect(html).toContain("1 normal");
    expect(html).not.toContain("<svg");
  });
});

describe("renderRankedList", () => {
  it("marks labeled entries and respects the limit", () => {
    const entries: ScoreEntry[] = Array.from({ length: 30 }, (_, i) => ({
      index: i,
      score: 1 - i / 100,
      labeled: i === 2,
    }));
    const html = renderRankedList(entries, 10);
    expect(html.match(/<tr class=/g)).toHaveLength(10);
    expect(html).toContain('class="labeled"');
  });
});

describe("renderScatter", () => {
  it("draws one dot per point and outlines the queried one", () => {
    const entries: ScoreEntry[] = [
      { index: 0, score: 0.5, labeled: false, features: [0.1, 0.2] },
      { index: 7, score: 0.7, labeled: false, features: [1.25, -0.5] },
      { index: 9, score: 0.4, labeled: true, features: [-1.0, 1.5] },
    ];
    const html = renderScatter(entries, card);
    expect(html.match(/<circle/g)).toHaveLength(3);
    expect(html).toContain('stroke="black"');
  });

  it("renders nothing without 2-d coordinates", () => {
    expect(renderScatter([{ index: 0, score: 0.5, labeled: false }], null)).toBe("");
  });
});

describe("sparkline", () => {
  it("is deterministic", () => {
    const values = [0.1, 0.4, 0.3, 0.9];
    expect(sparkline(values)).toBe(sparkline(values));
  });
});
