/** Minimal canvas renderers: 2D scatter, rotatable 3D scatter, bars. */

export interface ScatterPoint {
  coords: number[];
  selected: boolean;
}

const AXIS = "#667";
const DOT = "#4a90d9";
const SEL = "#d94a4a";

function prepare(canvas: HTMLCanvasElement): CanvasRenderingContext2D {
  const scale = window.devicePixelRatio || 1;
  const w = canvas.clientWidth || canvas.width;
  const h = canvas.clientHeight || canvas.height;
  canvas.width = w * scale;
  canvas.height = h * scale;
  const ctx = canvas.getContext("2d")!;
  ctx.setTransform(scale, 0, 0, scale, 0, 0);
  ctx.clearRect(0, 0, w, h);
  return ctx;
}

export function drawScatter2D(
  canvas: HTMLCanvasElement,
  points: ScatterPoint[],
  xIdx: number,
  yIdx: number,
  labels: [string, string],
): void {
  const ctx = prepare(canvas);
  const w = canvas.clientWidth || canvas.width;
  const h = canvas.clientHeight || canvas.height;
  const pad = 34;
  const xs = points.map((p) => p.coords[xIdx]);
  const ys = points.map((p) => p.coords[yIdx]);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  const sx = (v: number) =>
    pad + (x1 > x0 ? ((v - x0) / (x1 - x0)) * (w - pad - 10) : (w - pad) / 2);
  const sy = (v: number) =>
    h - pad - (y1 > y0 ? ((v - y0) / (y1 - y0)) * (h - pad - 10) : (h - pad) / 2);

  ctx.strokeStyle = AXIS;
  ctx.lineWidth = 1;
  ctx.strokeRect(pad, 10, w - pad - 10, h - pad - 10);
  ctx.fillStyle = AXIS;
  ctx.font = "11px sans-serif";
  ctx.fillText(labels[0], w / 2 - 20, h - 8);
  ctx.save();
  ctx.translate(12, h / 2 + 20);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText(labels[1], 0, 0);
  ctx.restore();
  ctx.fillText(x0.toFixed(0), pad - 4, h - pad + 14);
  ctx.fillText(x1.toFixed(0), w - 40, h - pad + 14);
  ctx.fillText(y1.toFixed(0), 2, 18);
  ctx.fillText(y0.toFixed(0), 2, h - pad);

  for (const p of points) {
    ctx.fillStyle = p.selected ? SEL : DOT;
    ctx.beginPath();
    ctx.arc(sx(p.coords[xIdx]), sy(p.coords[yIdx]), p.selected ? 5 : 2.5, 0, 2 * Math.PI);
    ctx.fill();
  }
}

export interface Scatter3DState {
  yaw: number;
  pitch: number;
}

export function drawScatter3D(
  canvas: HTMLCanvasElement,
  points: ScatterPoint[],
  state: Scatter3DState,
  labels: [string, string, string],
): void {
  const ctx = prepare(canvas);
  const w = canvas.clientWidth || canvas.width;
  const h = canvas.clientHeight || canvas.height;
  const mins = [0, 1, 2].map((k) => Math.min(...points.map((p) => p.coords[k])));
  const maxs = [0, 1, 2].map((k) => Math.max(...points.map((p) => p.coords[k])));
  const norm = (p: number[], k: number) =>
    maxs[k] > mins[k] ? (p[k] - mins[k]) / (maxs[k] - mins[k]) - 0.5 : 0;

  const cy = Math.cos(state.yaw);
  const sy = Math.sin(state.yaw);
  const cp = Math.cos(state.pitch);
  const sp = Math.sin(state.pitch);
  const project = (p: number[]): [number, number, number] => {
    const x = norm(p, 0);
    const y = norm(p, 1);
    const z = norm(p, 2);
    const rx = cy * x + sy * y;
    const ry = -sy * x + cy * y;
    const rz = cp * z - sp * ry;
    const depth = cp * ry + sp * z;
    const scale = Math.min(w, h) * 0.72;
    return [w / 2 + rx * scale, h / 2 - rz * scale, depth];
  };

  // axis tripod
  const origin = [mins[0], mins[1], mins[2]];
  ctx.font = "11px sans-serif";
  for (let k = 0; k < 3; k++) {
    const tip = [...origin];
    tip[k] = maxs[k];
    const [ox, oy] = project(origin);
    const [tx, ty] = project(tip);
    ctx.strokeStyle = AXIS;
    ctx.beginPath();
    ctx.moveTo(ox, oy);
    ctx.lineTo(tx, ty);
    ctx.stroke();
    ctx.fillStyle = AXIS;
    ctx.fillText(labels[k], tx + 3, ty);
  }

  const order = points
    .map((p, i) => ({ i, depth: project(p.coords)[2] }))
    .sort((a, b) => a.depth - b.depth);
  for (const { i } of order) {
    const p = points[i];
    const [px, py] = project(p.coords);
    ctx.fillStyle = p.selected ? SEL : DOT;
    ctx.beginPath();
    ctx.arc(px, py, p.selected ? 5.5 : 3, 0, 2 * Math.PI);
    ctx.fill();
  }
}

export function attachRotation(
  canvas: HTMLCanvasElement,
  state: Scatter3DState,
  redraw: () => void,
): void {
  let dragging = false;
  let last: [number, number] = [0, 0];
  canvas.addEventListener("pointerdown", (ev) => {
    dragging = true;
    last = [ev.clientX, ev.clientY];
    canvas.setPointerCapture(ev.pointerId);
  });
  canvas.addEventListener("pointermove", (ev) => {
    if (!dragging) return;
    state.yaw += (ev.clientX - last[0]) * 0.01;
    state.pitch = Math.max(
      -1.4, Math.min(1.4, state.pitch + (ev.clientY - last[1]) * 0.01),
    );
    last = [ev.clientX, ev.clientY];
    redraw();
  });
  canvas.addEventListener("pointerup", () => (dragging = false));
}

export function drawBars(
  host: HTMLElement,
  groups: { label: string; values: number[]; highlight: boolean }[],
  agentLabels: string[],
  unit: string,
): void {
  const palette = ["#4a90d9", "#d9a14a", "#5cb85c", "#b85c9e", "#7a7ad9", "#d95c5c"];
  const maxVal = Math.max(...groups.flatMap((g) => g.values), 1);
  const rows = groups
    .map((g) => {
      const bars = g.values
        .map((v, a) => {
          const width = Math.max(0.5, (v / maxVal) * 100);
          return (
            `<div class="bar-line"><span class="bar-agent">${agentLabels[a]}</span>` +
            `<div class="bar" style="width:${width}%;background:${palette[a % palette.length]}"></div>` +
            `<span class="bar-value">${v.toLocaleString()}</span></div>`
          );
        })
        .join("");
      return (
        `<div class="bar-group${g.highlight ? " focus" : ""}">` +
        `<div class="bar-title">${g.label}</div>${bars}</div>`
      );
    })
    .join("");
  host.innerHTML = `<div class="bar-unit">${unit}</div>${rows}`;
}
