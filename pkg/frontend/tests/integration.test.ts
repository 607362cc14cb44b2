/**
 * End-to-end: drives the real Python service with the UI's controller code
 * and checks that a scripted 10-label session reproduces, via the history
 * endpoint, the exact per-iteration AP values of the batch `simulate`
 * command run with the same seed — plus the refresh-safety contract.
 */

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { SessionApi } from "../src/api.js";
import { SessionController } from "../src/controller.js";

const SEED = 11;
const QUERIES = 10;
const PORT = 8900 + Math.floor(Math.random() * 500);

const PREP = `
import json, sys
from pathlib import Path
from actiforest.cli import main
from actiforest.data import SplitSpec, make_toroid, save_csv, split

work = Path(sys.argv[1])
seed = int(sys.argv[2])
queries = int(sys.argv[3])

ds = make_toroid(150, 15, seed=3)
save_csv(ds, work / "toroid.csv")
code = main([
    "simulate", "--data", str(work / "toroid.csv"), "--label-col", "label",
    "--queries", str(queries), "--reps", "1", "--trees", "15", "--psi", "32",
    "--seed", str(seed), "--out", str(work / "sim"),
])
assert code == 0, code

train, test = split(ds, SplitSpec(0.5, seed, True))
json.dump(
    {
        "train": {"features": train.features.tolist(), "labels": train.labels.tolist()},
        "eval": {"features": test.features.tolist(), "labels": test.labels.tolist()},
    },
    (work / "prep.json").open("w"),
)
`;

const SERVE = `
import sys
import uvicorn
from actiforest.service import create_app
uvicorn.run(create_app(data_dir=sys.argv[1]), host="127.0.0.1", port=int(sys.argv[2]), log_level="warning")
`;

let server: ChildProcess;
let work: string;
let prep: {
  train: { features: number[][]; labels: number[] };
  eval: { features: number[][]; labels: number[] };
};
let simAp: Map<number, number>;

async function waitForServer(base: string): Promise<void> {
  for (let i = 0; i < 200; i++) {
    try {
      const resp = await fetch(`${base}/sessions/probe`);
      if (resp.status === 404 || resp.status === 200) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  throw new Error("service did not come up");
}

beforeAll(async () => {
  work = mkdtempSync(join(tmpdir(), "actiforest-ui-"));
  execFileSync("python3", ["-c", PREP, work, String(SEED), String(QUERIES)], {
    stdio: "inherit",
  });
  prep = JSON.parse(readFileSync(join(work, "prep.json"), "utf8"));

  const raw = readFileSync(join(work, "sim", "raw.csv"), "utf8").trim().split("\n");
  const header = raw[0].split(",");
  const iterCol = header.indexOf("iteration");
  const apCol = header.indexOf("ap");
  simAp = new Map(
    raw.slice(1).map((line) => {
      const cells = line.split(",");
      return [Number(cells[iterCol]), Number(cells[apCol])];
    }),
  );

  server = spawn("python3", ["-c", SERVE, join(work, "state"), String(PORT)], {
    stdio: "ignore",
  });
  await waitForServer(`http://127.0.0.1:${PORT}`);
});

afterAll(() => {
  server?.kill();
});

describe("scripted browser session against the live service", () => {
  it("reproduces the batch simulation's per-iteration AP exactly", async () => {
    const api = new SessionApi(`http://127.0.0.1:${PORT}`);
    const created = await api.createSession({
      dataset: { features: prep.train.features, labels: prep.train.labels },
      eval: { features: prep.eval.features, labels: prep.eval.labels },
      config: { n_trees: 15, psi: 32, seed: SEED, budget: QUERIES },
    });
    const controller = new SessionController(api, created.session_id);
    await controller.refresh();
    controller.autoAdvance = false;

    for (let i = 0; i < QUERIES; i++) {
      await controller.nextQuery();
      expect(controller.view?.labelsEnabled).toBe(true);
      const card = controller.view!.card!;

      if (i === 2) {
        // mid-session page refresh: a fresh controller hydrated purely from
        // GET endpoints must reconstruct the identical view
        const rehydrated = new SessionController(api, created.session_id);
        await rehydrated.refresh();
        expect(rehydrated.view).toEqual(controller.view);
      }

      const verdict = prep.train.labels[card.point_index] === 1 ? "anomaly" : "normal";
      await controller.submit(verdict);
    }

    const history = await api.history(created.session_id);
    expect(history.baseline_metrics?.ap).toBe(simAp.get(0));
    expect(history.entries).toHaveLength(QUERIES);
    for (const entry of history.entries) {
      expect(entry.metrics?.ap).toBe(simAp.get(entry.iteration));
    }
  });

  it("keeps label controls unusable outside awaiting status", async () => {
    const api = new SessionApi(`http://127.0.0.1:${PORT}`);
    const created = await api.createSession({
      dataset: { features: prep.train.features, labels: prep.train.labels },
      config: { n_trees: 10, psi: 32, seed: 1, budget: 1 },
    });
    const controller = new SessionController(api, created.session_id, () => {});
    await controller.refresh();
    expect(controller.view?.labelsEnabled).toBe(false);

    // a submit in idle state must not reach the server
    await controller.submit("anomaly");
    expect((await api.history(created.session_id)).entries).toHaveLength(0);

    await controller.nextQuery();
    expect(controller.view?.labelsEnabled).toBe(true);
    const card = controller.view!.card!;
    await controller.submit(prep.train.labels[card.point_index] === 1 ? "anomaly" : "normal");

    // budget of one is now spent
    expect(controller.view?.summary.status).toBe("budget_exhausted");
    expect(controller.view?.labelsEnabled).toBe(false);
  });
});
