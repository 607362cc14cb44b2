/** Bootstrap: attach to an existing session (?session=<id>) or create a
 * toroid demo session, then keep the panels in sync with the controller. */

import { SessionApi } from "./api.js";
import { SessionController } from "./controller.js";
import {
  renderBanner,
  renderHistory,
  renderQueryCard,
  renderRankedList,
  renderScatter,
  renderSummary,
} from "./render.js";

const api = new SessionApi("");

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

function paint(c: SessionController): void {
  const view = c.view;
  $("banner").innerHTML = renderBanner(c.banner);
  if (!view) return;
  $("summary").innerHTML = renderSummary(view);
  $("query").innerHTML = renderQueryCard(view);
  $("ranked").innerHTML = renderRankedList(view.ranked);
  $("history").innerHTML = renderHistory(view.history, view.baseline);
  $("scatter").innerHTML = view.scatterEnabled
    ? renderScatter(view.ranked, view.card)
    : "";
  (document.getElementById("auto-advance") as HTMLInputElement | null)?.toggleAttribute(
    "checked",
    c.autoAdvance,
  );
}

function wire(c: SessionController): void {
  $("query").addEventListener("click", (ev) => {
    const target = ev.target as HTMLElement;
    if (target.id === "next-query") void c.nextQuery();
    const verdict = target.getAttribute("data-verdict");
    if (verdict === "normal" || verdict === "anomaly" || verdict === "skip") {
      void c.submit(verdict);
    }
  });
  const auto = document.getElementById("auto-advance") as HTMLInputElement | null;
  auto?.addEventListener("change", () => {
    c.autoAdvance = auto.checked;
  });
}

async function attach(sessionId: string): Promise<void> {
  const controller = new SessionController(api, sessionId, paint);
  wire(controller);
  history.replaceState(null, "", `?session=${sessionId}`);
  await controller.refresh();
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(location.search);
  const existing = params.get("session");
  if (existing) {
    await attach(existing);
    return;
  }
  $("create-demo").addEventListener("click", async () => {
    $("create-demo").setAttribute("disabled", "");
    const created = await api.createSession({
      dataset: { toroid: { n_normal: 400, n_anomaly: 25, seed: 7 } },
      config: { budget: 25, seed: 7 },
    });
    await attach(created.session_id);
  });
}

void boot();
