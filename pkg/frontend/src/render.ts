/**
 * Pure HTML builders. No DOM access here, so everything is unit-testable in
 * node; main.ts owns insertion and event wiring.
 */

import type { HistoryEntry, Metrics, QueryCard, ScoreEntry } from "./api.js";
import { labelCounts, metricSeries, STATUS_EXHAUSTED } from "./state.js";
import type { SessionView } from "./state.js";

const esc = (s: string) =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

const fmt = (x: number, digits = 4) => x.toFixed(digits);

export function renderSummary(view: SessionView): string {
  const s = view.summary;
  const used = `${s.budget_used} / ${s.budget}`;
  return `
    <div class="summary">
      <span class="badge status-${esc(s.status)}">${esc(s.status)}</span>
      <span>budget ${used}</span>
      <span>pool ${s.pool_size}</span>
      <span>${esc(s.query_strategy)} · ${esc(s.update_strategy)}</span>
    </div>`;
}

export function renderQueryCard(view: SessionView): string {
  const { card, labelsEnabled } = view;
  if (view.summary.status === STATUS_EXHAUSTED) {
    return `<div class="card done"><p>Budget exhausted — labeling finished.</p></div>`;
  }
  if (!card) {
    return `<div class="card idle">
      <p>No outstanding query.</p>
      <button id="next-query">Request next query</button>
    </div>`;
  }
  const disabled = labelsEnabled ? "" : " disabled";
  const rows = card.features
    .map((v, j) => {
      const pct = Math.round(card.feature_percentiles[j] * 100);
      return `<tr>
        <td>f${j}</td>
        <td class="num">${fmt(v)}</td>
        <td><div class="pct-bar"><div class="pct-fill" style="width:${pct}%"></div></div></td>
        <td class="num">${pct}%</td>
      </tr>`;
    })
    .join("");
  return `
    <div class="card query">
      <h3>Point #${card.point_index}</h3>
      <p>
        score <strong>${fmt(card.score)}</strong>
        · rank ${card.rank} of ${card.pool_size}
        · uncertainty ${fmt(card.uncertainty)}
      </p>
      <table class="features">
        <thead><tr><th>feature</th><th>value</th><th colspan="2">training percentile</th></tr></thead>
        <tbody>${rows}</tbody>
      </table>
      <div class="verdicts">
        <button data-verdict="anomaly"${disabled}>Anomaly</button>
        <button data-verdict="normal"${disabled}>Normal</button>
        <button data-verdict="skip"${disabled}>Skip</button>
      </div>
    </div>`;
}

export function renderRankedList(entries: ScoreEntry[], limit = 15): string {
  const rows = entries
    .slice(0, limit)
    .map(
      (e) => `<tr class="${e.labeled ? "labeled" : ""}">
        <td>#${e.index}</td>
        <td class="num">${fmt(e.score)}</td>
        <td>${e.labeled ? "labeled" : ""}</td>
      </tr>`,
    )
    .join("");
  return `<table class="ranked">
    <thead><tr><th>point</th><th>score</th><th></th></tr></thead>
    <tbody>${rows}</tbody>
  </table>`;
}

export function sparkline(values: number[], width = 260, height = 60): string {
  if (values.length === 0) return "";
  const lo = Math.min(...values, 0);
  const hi = Math.max(...values, 1);
  const span = hi - lo || 1;
  const step = values.length > 1 ? width / (values.length - 1) : 0;
  const points = values
    .map((v, i) => `${(i * step).toFixed(1)},${(height - ((v - lo) / span) * height).toFixed(1)}`)
    .join(" ");
  return `<svg class="spark" viewBox="0 0 ${width} ${height}" width="${width}" height="${height}">
    <polyline fill="none" stroke-width="1.5" points="${points}"></polyline>
  </svg>`;
}

export function renderHistory(
  history: HistoryEntry[],
  baseline: Metrics | null,
): string {
  if (history.length === 0 && baseline === null) {
    return `<p class="placeholder">No labels yet.</p>`;
  }
  const series = metricSeries(history, baseline);
  let chart: string;
  if (series && series.ap.length > 1) {
    const last = series.ap[series.ap.length - 1];
    chart = `
      <p>test AP ${fmt(series.ap[0], 3)} → <strong>${fmt(last, 3)}</strong> over ${series.ap.length - 1} labels</p>
      ${sparkline(series.ap)}`;
  } else if (series) {
    chart = `<p>baseline test AP ${fmt(series.ap[0], 3)}</p>`;
  } else {
    const counts = labelCounts(history);
    chart = `<p>${counts.anomaly} anomalies · ${counts.normal} normal labels</p>`;
  }
  const rows = history
    .slice()
    .reverse()
    .map(
      (e) => `<li>
        <span class="it">#${e.iteration}</span> point ${e.index} →
        <span class="lab-${esc(e.label)}">${esc(e.label)}</span>
        ${e.metrics ? `<span class="num">AP ${fmt(e.metrics.ap, 3)}</span>` : ""}
      </li>`,
    )
    .join("");
  return `${chart}<ol class="timeline" reversed>${rows}</ol>`;
}

export function renderScatter(
  entries: ScoreEntry[],
  card: QueryCard | null,
  size = 360,
): string {
  const pts = entries.filter((e) => e.features && e.features.length === 2);
  if (pts.length === 0) return "";
  const xs = pts.map((e) => e.features![0]);
  const ys = pts.map((e) => e.features![1]);
  const lo = Math.min(...xs, ...ys);
  const hi = Math.max(...xs, ...ys);
  const span = hi - lo || 1;
  const px = (v: number) => (((v - lo) / span) * (size - 12) + 6).toFixed(1);
  const scores = pts.map((e) => e.score);
  const sLo = Math.min(...scores);
  const sSpan = Math.max(...scores) - sLo || 1;
  const dots = pts
    .map((e) => {
      const heat = Math.round(((e.score - sLo) / sSpan) * 255);
      const cls = e.labeled ? "dot labeled" : "dot";
      const outlined =
        card && e.index === card.point_index ? ' stroke="black" stroke-width="2"' : "";
      return `<circle class="${cls}" cx="${px(e.features![0])}" cy="${px(-e.features![1] + lo + hi)}" r="3" fill="rgb(${heat},${Math.round(80 + (255 - heat) * 0.3)},${255 - heat})"${outlined}></circle>`;
    })
    .join("");
  return `<svg class="scatter" viewBox="0 0 ${size} ${size}" width="${size}" height="${size}">${dots}</svg>`;
}

export function renderBanner(message: string | null): string {
  return message ? `<div class="banner">${esc(message)}</div>` : "";
}
