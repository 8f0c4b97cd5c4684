/** Explorer entry point: loads a bundle, wires the controls, and keeps
 * every view consistent with the derived game. */

import { exportReport, loadBundle, BundleFormatError } from "./bundle.js";
import { attachRotation, drawBars, drawScatter2D, drawScatter3D, Scatter3DState } from "./charts.js";
import { coalitionMatrix, deriveGame, DerivedGame } from "./game.js";
import { orderedKeys, splitEdges } from "./partitions.js";
import { Criterion, DeviationClassName, DeviationRule, RunBundle } from "./types.js";

interface State {
  bundle: RunBundle | null;
  criterionKind: "utopia" | "favor";
  beta: number[];
  p: number;
  favorAgent: number; // 1-based
  classes: DeviationClassName[];
  eta: number;
  rounded: boolean;
  focusKey: string | null;
  rotation: Scatter3DState;
}

const state: State = {
  bundle: null,
  criterionKind: "utopia",
  beta: [],
  p: 2,
  favorAgent: 1,
  classes: ["single", "pair"],
  eta: 1.0,
  rounded: true,
  focusKey: null,
  rotation: { yaw: 0.7, pitch: 0.5 },
};

const el = (id: string) => document.getElementById(id)!;

function criterion(): Criterion {
  return state.criterionKind === "utopia"
    ? { kind: "utopia", beta: [...state.beta], p: state.p }
    : { kind: "favor", agent: state.favorAgent };
}

function rule(): DeviationRule {
  return { classes: [...state.classes], eta: state.eta };
}

function showError(message: string): void {
  el("error").textContent = message;
  el("error").classList.toggle("hidden", !message);
}

function setBundle(bundle: RunBundle): void {
  state.bundle = bundle;
  const n = bundle.agent_labels.length;
  state.beta = new Array(n).fill(1 / n);
  state.favorAgent = 1;
  state.focusKey = orderedKeys(Object.keys(bundle.archives))[0];
  el("bundle-meta").textContent =
    `${bundle.scenario.name} - ${bundle.method}` +
    (bundle.strategy ? ` (${bundle.strategy})` : "") +
    ` - ${Object.keys(bundle.archives).length} structures, ` +
    `${Object.values(bundle.archives).reduce((s, a) => s + a.length, 0)} front points`;
  buildControls();
  recompute();
  el("app").classList.remove("hidden");
}

function buildControls(): void {
  const bundle = state.bundle!;
  const labels = bundle.agent_labels;
  const sliders = labels
    .map(
      (label, a) => `
      <label class="slider-row">
        <span>&beta;&#771;(${label})</span>
        <input type="range" min="0.01" max="0.98" step="0.01"
               value="${state.beta[a].toFixed(2)}" data-agent="${a}" class="beta-slider">
        <span class="beta-value" id="beta-value-${a}">${state.beta[a].toFixed(3)}</span>
      </label>`,
    )
    .join("");
  el("beta-sliders").innerHTML = sliders;
  document.querySelectorAll<HTMLInputElement>(".beta-slider").forEach((input) => {
    input.addEventListener("input", () => {
      const a = Number(input.dataset.agent);
      const raw = state.beta.map((v, i) => (i === a ? Number(input.value) : v));
      const total = raw.reduce((s, v) => s + v, 0);
      state.beta = raw.map((v) => v / total);
      state.beta.forEach((v, i) => {
        el(`beta-value-${i}`).textContent = v.toFixed(3);
        if (i !== a) {
          const other = document.querySelector<HTMLInputElement>(
            `.beta-slider[data-agent="${i}"]`,
          )!;
          other.value = v.toFixed(2);
        }
      });
      recompute();
    });
  });

  const favor = el("favor-agent") as HTMLSelectElement;
  favor.innerHTML = labels
    .map((label, a) => `<option value="${a + 1}">${label}</option>`)
    .join("");
  favor.value = String(state.favorAgent);
}

function recompute(): void {
  if (!state.bundle) return;
  let derived: DerivedGame;
  try {
    derived = deriveGame(state.bundle, criterion(), rule(), state.rounded);
  } catch (err) {
    showError((err as Error).message);
    return;
  }
  showError("");
  renderGraph(derived);
  renderTable(derived);
  renderExternalities(derived);
  renderBars(derived);
  renderFront(derived);
  el("download-report").onclick = () => {
    const blob = new Blob([exportReport(derived.report) + "\n"], { type: "application/json" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "game-report.json";
    a.click();
    URL.revokeObjectURL(a.href);
  };
}

function renderGraph(derived: DerivedGame): void {
  const keys = derived.keys;
  const stable = new Set(derived.report.stable);
  const welfareMax = new Set(derived.report.welfare_max);
  const levels = new Map<number, string[]>();
  for (const key of keys) {
    const lvl = derived.blocks[key].length;
    if (!levels.has(lvl)) levels.set(lvl, []);
    levels.get(lvl)!.push(key);
  }
  const cols = [...levels.keys()].sort((a, b) => a - b);
  const colWidth = 190;
  const rowHeight = 38;
  const maxRows = Math.max(...cols.map((c) => levels.get(c)!.length));
  const width = cols.length * colWidth + 20;
  const height = maxRows * rowHeight + 50;
  const pos = new Map<string, [number, number]>();
  cols.forEach((lvl, ci) => {
    const items = levels.get(lvl)!;
    items.forEach((key, ri) => {
      const x = 10 + ci * colWidth;
      const y = 35 + ri * rowHeight + ((maxRows - items.length) * rowHeight) / 2;
      pos.set(key, [x, y]);
    });
  });
  const edges = splitEdges(keys, state.bundle!.agent_labels.length)
    .map(([coarse, fine]) => {
      const [x1, y1] = pos.get(coarse)!;
      const [x2, y2] = pos.get(fine)!;
      return `<line x1="${x1 + 150}" y1="${y1 + 11}" x2="${x2}" y2="${y2 + 11}" class="edge"/>`;
    })
    .join("");
  const nodes = keys
    .map((key) => {
      const [x, y] = pos.get(key)!;
      const classes = ["node"];
      if (stable.has(key)) classes.push("stable");
      if (welfareMax.has(key)) classes.push("welfare");
      if (key === state.focusKey) classes.push("focused");
      return (
        `<g class="${classes.join(" ")}" data-key="${key}">` +
        `<rect x="${x}" y="${y}" width="150" height="22" rx="5"/>` +
        `<text x="${x + 75}" y="${y + 15}" text-anchor="middle">${key}</text></g>`
      );
    })
    .join("");
  const headers = cols
    .map((lvl, ci) => `<text x="${10 + ci * colWidth + 75}" y="18" text-anchor="middle" class="level">|CS| = ${lvl}</text>`)
    .join("");
  el("graph").innerHTML =
    `<svg viewBox="0 0 ${width} ${height}" width="${width}" height="${height}">${headers}${edges}${nodes}</svg>`;
  el("graph")
    .querySelectorAll<SVGGElement>("g.node")
    .forEach((node) => {
      node.addEventListener("click", () => {
        state.focusKey = node.dataset.key!;
        recompute();
      });
    });
}

function renderTable(derived: DerivedGame): void {
  const labels = state.bundle!.agent_labels;
  const head =
    "<tr><th>structure</th><th>coalition values</th>" +
    labels.map((l) => `<th>z(${l})</th>`).join("") +
    "<th>welfare</th></tr>";
  const rows = derived.report.structures
    .map((s) => {
      const vals = Object.entries(s.values)
        .map(([c, v]) => `w(${c}) = ${v.toLocaleString()}`)
        .join("<br>");
      const marks: string[] = [];
      if (derived.report.welfare_max.includes(s.key)) marks.push("&#9733;");
      if (derived.report.stable.includes(s.key)) marks.push("&#9679;");
      return (
        `<tr class="${s.key === state.focusKey ? "focused" : ""}">` +
        `<td>${s.key} ${marks.join(" ")}</td><td>${vals}</td>` +
        s.payoffs.map((z) => `<td>${z.toLocaleString()}</td>`).join("") +
        `<td>${s.welfare.toLocaleString()}</td></tr>`
      );
    })
    .join("");
  el("table").innerHTML =
    `<table>${head}${rows}</table>` +
    `<p class="legend">&#9733; welfare-maximizing &nbsp; &#9679; stable under the current rule</p>`;
}

function renderExternalities(derived: DerivedGame): void {
  const badge = el("ext-badge");
  badge.textContent = derived.report.externality_class;
  badge.className = `badge ${derived.report.externality_class}`;
  el("ext-records").innerHTML = derived.report.externalities
    .map(
      (r) =>
        `<div class="ext-row"><code>&epsilon;(${r.coalition}; ${r.coarse} vs ${r.fine})` +
        ` = ${r.value.toLocaleString()}</code></div>`,
    )
    .join("");
}

function renderBars(derived: DerivedGame): void {
  const labels = state.bundle!.agent_labels;
  const groups = derived.report.structures.map((s) => ({
    label: s.key,
    values: s.payoffs,
    highlight: s.key === state.focusKey,
  }));
  drawBars(el("bars"), groups, labels, state.bundle!.scenario.volume_unit || "volume");
}

function renderFront(derived: DerivedGame): void {
  const key = state.focusKey!;
  const bundle = state.bundle!;
  const blocks = derived.blocks[key];
  const gamma =
    bundle.scenario.agent_weights || new Array(bundle.agent_labels.length).fill(1);
  const points = bundle.archives[key];
  const matrix = coalitionMatrix(points, blocks, gamma as number[]);
  const selectedIdx = derived.selected[key];
  const scatter = matrix.map((coords, i) => ({ coords, selected: i === selectedIdx }));
  const names = blocks.map((b) => `w({${b.map((v) => v + 1).join(",")}})`);
  const host = el("front");
  host.innerHTML = "";
  const title = document.createElement("h3");
  title.textContent = `front of ${key} (${points.length} points)`;
  host.appendChild(title);
  if (blocks.length === 1) {
    const p = document.createElement("p");
    p.textContent = `single optimum: ${names[0]} = ${matrix[0][0].toLocaleString()}`;
    host.appendChild(p);
    return;
  }
  if (blocks.length >= 3) {
    const canvas3 = document.createElement("canvas");
    canvas3.className = "front3d";
    host.appendChild(canvas3);
    const redraw = () =>
      drawScatter3D(canvas3, scatter, state.rotation, [names[0], names[1], names[2]]);
    attachRotation(canvas3, state.rotation, redraw);
    redraw();
    const hint = document.createElement("p");
    hint.className = "legend";
    hint.textContent = "drag to rotate - red marker is the selected point";
    host.appendChild(hint);
  }
  const pairHost = document.createElement("div");
  pairHost.className = "pair-grid";
  host.appendChild(pairHost);
  for (let i = 0; i < blocks.length; i++) {
    for (let j = i + 1; j < blocks.length; j++) {
      const canvas = document.createElement("canvas");
      canvas.className = "front2d";
      pairHost.appendChild(canvas);
      drawScatter2D(canvas, scatter, i, j, [names[i], names[j]]);
    }
  }
}

function wireStaticControls(): void {
  (el("file-input") as HTMLInputElement).addEventListener("change", async (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    if (!file) return;
    try {
      setBundle(loadBundle(await file.text()));
    } catch (err) {
      showError(err instanceof BundleFormatError ? err.message : String(err));
    }
  });
  document.querySelectorAll<HTMLInputElement>("input[name=criterion]").forEach((radio) => {
    radio.addEventListener("change", () => {
      state.criterionKind = radio.value as "utopia" | "favor";
      el("utopia-controls").classList.toggle("hidden", state.criterionKind !== "utopia");
      el("favor-controls").classList.toggle("hidden", state.criterionKind !== "favor");
      recompute();
    });
  });
  (el("p-select") as HTMLSelectElement).addEventListener("change", (ev) => {
    state.p = Number((ev.target as HTMLSelectElement).value);
    recompute();
  });
  (el("favor-agent") as HTMLSelectElement).addEventListener("change", (ev) => {
    state.favorAgent = Number((ev.target as HTMLSelectElement).value);
    recompute();
  });
  (el("eta-input") as HTMLInputElement).addEventListener("change", (ev) => {
    state.eta = Math.max(0, Number((ev.target as HTMLInputElement).value) || 0);
    recompute();
  });
  document.querySelectorAll<HTMLInputElement>(".class-box").forEach((box) => {
    box.addEventListener("change", () => {
      const classes = [...document.querySelectorAll<HTMLInputElement>(".class-box")]
        .filter((b) => b.checked)
        .map((b) => b.value as DeviationClassName);
      if (!classes.length) {
        box.checked = true;
        return;
      }
      state.classes = classes;
      recompute();
    });
  });
  (el("rounded-box") as HTMLInputElement).addEventListener("change", (ev) => {
    state.rounded = (ev.target as HTMLInputElement).checked;
    recompute();
  });
}

async function tryUrlParam(): Promise<void> {
  const url = new URLSearchParams(location.search).get("bundle");
  if (!url) return;
  try {
    const resp = await fetch(url);
    setBundle(loadBundle(await resp.text()));
  } catch (err) {
    showError(`could not load ${url}: ${err}`);
  }
}

wireStaticControls();
void tryUrlParam();
