/** Client-side game derivation: the exact mirror of the engine's
 * selection -> payoffs -> externalities -> welfare -> stability chain.
 * Everything here is pure arithmetic on the archives already in the
 * bundle; no solver runs, which is what makes the exploration loop
 * instant.
 */

import {
  afterDeviation,
  canonicalKey,
  mergeBlocks,
  orderedKeys,
  parseKey,
  Blocks,
} from "./partitions.js";
import {
  ArchivePoint,
  Criterion,
  DeviationRule,
  ExternalityRecord,
  GameReport,
  RunBundle,
  StructureRow,
} from "./types.js";

/** Round half to even at integer precision (matches the engine). */
export function rint(x: number): number {
  const f = Math.floor(x);
  const diff = x - f;
  if (diff > 0.5) return f + 1;
  if (diff < 0.5) return f;
  return f % 2 === 0 ? f : f + 1;
}

function gammaOf(bundle: RunBundle): number[] {
  const n = bundle.agent_labels.length;
  const g = bundle.scenario.agent_weights;
  return g && g.length === n ? g.map(Number) : new Array(n).fill(1);
}

/** Per-point coalition objective values for one structure. */
export function coalitionMatrix(
  points: ArchivePoint[],
  blocks: Blocks,
  gamma: number[],
): number[][] {
  return points.map((p) =>
    blocks.map((b) => {
      let total = 0;
      for (const a of b) total += gamma[a] * p.agent_values[a];
      return total;
    }),
  );
}

/** Index of the selected archive point under a criterion. */
export function selectIndex(
  points: ArchivePoint[],
  blocks: Blocks,
  gamma: number[],
  criterion: Criterion,
): number {
  if (criterion.kind === "favor") {
    const a = criterion.agent - 1;
    if (a < 0 || a >= gamma.length) throw new Error(`agent ${criterion.agent} out of range`);
    const payoff = points.map((p) => gamma[a] * p.agent_values[a]);
    const best = Math.max(...payoff);
    let pick = -1;
    let bestTotal = -Infinity;
    for (let i = 0; i < points.length; i++) {
      if (payoff[i] !== best) continue;
      let total = 0;
      for (let k = 0; k < gamma.length; k++) total += gamma[k] * points[i].agent_values[k];
      if (total > bestTotal) {
        bestTotal = total;
        pick = i;
      }
    }
    return pick;
  }
  const beta = criterion.beta;
  if (beta.length !== gamma.length) throw new Error("one weight per agent");
  if (beta.some((b) => b <= 0)) throw new Error("weights must be strictly positive");
  if (criterion.p < 1) throw new Error("norm exponent must be >= 1");
  const m = coalitionMatrix(points, blocks, gamma);
  const d = blocks.length;
  const utopia = new Array(d).fill(-Infinity);
  for (const row of m) for (let c = 0; c < d; c++) utopia[c] = Math.max(utopia[c], row[c]);
  const betaC = blocks.map((b) => {
    let s = 0;
    for (const a of b) s += beta[a];
    return s;
  });
  let pick = 0;
  let bestDist = Infinity;
  for (let i = 0; i < m.length; i++) {
    let acc = 0;
    for (let c = 0; c < d; c++) {
      acc += Math.abs(betaC[c] * (m[i][c] - utopia[c])) ** criterion.p;
    }
    const dist = acc ** (1 / criterion.p);
    if (dist < bestDist) {
      bestDist = dist;
      pick = i;
    }
  }
  return pick;
}

export interface DerivedGame {
  keys: string[]; // structures in (level, key) order
  blocks: Record<string, Blocks>;
  selected: Record<string, number>; // archive point index per structure
  payoffs: Record<string, number[]>; // rounded per-agent payoffs
  rawPayoffs: Record<string, number[]>;
  report: GameReport;
}

function coalitionValue(payoffs: number[], block: number[]): number {
  let total = 0;
  for (const a of block) total += payoffs[a];
  return total;
}

function externalityRecords(
  keys: string[],
  blocks: Record<string, Blocks>,
  payoffs: Record<string, number[]>,
): ExternalityRecord[] {
  const records: ExternalityRecord[] = [];
  for (const fineKey of keys) {
    const fine = blocks[fineKey];
    const k = fine.length;
    for (let ci = 0; ci < k; ci++) {
      const others = [];
      for (let j = 0; j < k; j++) if (j !== ci) others.push(j);
      if (others.length < 2) continue;
      for (let x = 0; x < others.length; x++) {
        for (let y = x + 1; y < others.length; y++) {
          const coarseKey = canonicalKey(mergeBlocks(fine, others[x], others[y]));
          records.push({
            coalition: `{${fine[ci].map((v) => v + 1).join(",")}}`,
            coarse: coarseKey,
            fine: fineKey,
            value:
              coalitionValue(payoffs[coarseKey], fine[ci]) -
              coalitionValue(payoffs[fineKey], fine[ci]),
          });
        }
      }
    }
  }
  return records;
}

function classifyRecords(records: ExternalityRecord[]): GameReport["externality_class"] {
  const neg = records.some((r) => r.value < 0);
  const pos = records.some((r) => r.value > 0);
  if (!neg && !pos) return "zero";
  if (neg && pos) return "mixed";
  return neg ? "negative" : "positive";
}

function* deviatingSets(nAgents: number, rule: DeviationRule): Generator<number[]> {
  if (rule.classes.includes("subset")) {
    for (let mask = 1; mask < 1 << nAgents; mask++) {
      const movers = [];
      for (let a = 0; a < nAgents; a++) if ((mask >> a) & 1) movers.push(a);
      yield movers;
    }
    return;
  }
  if (rule.classes.includes("single")) {
    for (let a = 0; a < nAgents; a++) yield [a];
  }
  if (rule.classes.includes("pair")) {
    for (let a = 0; a < nAgents; a++) {
      for (let b = a + 1; b < nAgents; b++) yield [a, b];
    }
  }
}

function stableKeys(
  keys: string[],
  blocks: Record<string, Blocks>,
  payoffs: Record<string, number[]>,
  nAgents: number,
  rule: DeviationRule,
): string[] {
  const stable: string[] = [];
  for (const key of keys) {
    const z = payoffs[key];
    let unstable = false;
    for (const movers of deviatingSets(nAgents, rule)) {
      const targetKey = canonicalKey(afterDeviation(blocks[key], movers));
      if (targetKey === key) continue;
      const zNew = payoffs[targetKey];
      if (movers.every((a) => zNew[a] > z[a] + rule.eta)) {
        unstable = true;
        break;
      }
    }
    if (!unstable) stable.push(key);
  }
  return stable;
}

/** Derive the full game from a bundle under the given controls.
 * Mirrors the engine: selection on full precision, then the report
 * (externalities, welfare, stability) on values rounded to whole units
 * unless `rounded` is false.
 */
export function deriveGame(
  bundle: RunBundle,
  criterion: Criterion,
  rule: DeviationRule,
  rounded = true,
): DerivedGame {
  const gamma = gammaOf(bundle);
  const nAgents = bundle.agent_labels.length;
  const keys = orderedKeys(Object.keys(bundle.archives));
  const blocks: Record<string, Blocks> = {};
  const selected: Record<string, number> = {};
  const rawPayoffs: Record<string, number[]> = {};
  const payoffs: Record<string, number[]> = {};
  for (const key of keys) {
    const b = parseKey(key).map((x) => [...x].sort((p, q) => p - q));
    blocks[key] = b.sort((p, q) => p[0] - q[0]);
    const points = bundle.archives[key];
    const idx = selectIndex(points, blocks[key], gamma, criterion);
    selected[key] = idx;
    const z = points[idx].agent_values.map((v, a) => gamma[a] * v);
    rawPayoffs[key] = z;
    payoffs[key] = rounded ? z.map(rint) : z;
  }

  const welfare: Record<string, number> = {};
  for (const key of keys) {
    let total = 0;
    for (let a = 0; a < nAgents; a++) total += payoffs[key][a];
    welfare[key] = total;
  }
  const best = Math.max(...keys.map((k) => welfare[k]));
  const welfareMax = keys.filter((k) => welfare[k] >= best - 1e-9).sort();

  const records = nAgents >= 3 ? externalityRecords(keys, blocks, payoffs) : [];
  const stable = stableKeys(keys, blocks, payoffs, nAgents, rule).sort();

  const structures: StructureRow[] = keys.map((key) => ({
    key,
    level: blocks[key].length,
    payoffs: payoffs[key],
    values: Object.fromEntries(
      blocks[key].map((b) => [
        `{${b.map((v) => v + 1).join(",")}}`,
        coalitionValue(payoffs[key], b),
      ]),
    ),
    welfare: welfare[key],
  }));

  const report: GameReport = {
    criterion:
      criterion.kind === "utopia"
        ? { kind: "utopia", beta: [...criterion.beta], p: criterion.p }
        : { kind: "favor", agent: criterion.agent },
    deviation_rule: { classes: [...rule.classes].sort(), eta: rule.eta },
    rounded,
    structures,
    externalities: records,
    externality_class: records.length ? classifyRecords(records) : "zero",
    welfare_max: welfareMax,
    stable,
  };
  return { keys, blocks, selected, payoffs, rawPayoffs, report };
}
