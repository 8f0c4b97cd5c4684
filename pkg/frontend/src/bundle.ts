/** Bundle loading/validation and canonical report serialization. */

import { RunBundle } from "./types.js";
import { agentCount, parseKey } from "./partitions.js";

export class BundleFormatError extends Error {
  constructor(public path: string, message: string) {
    super(`${path}: ${message}`);
  }
}

function expectArray(value: unknown, path: string): unknown[] {
  if (!Array.isArray(value)) throw new BundleFormatError(path, "expected an array");
  return value;
}

function expectNumbers(value: unknown, path: string): number[] {
  const arr = expectArray(value, path);
  if (!arr.every((v) => typeof v === "number" && Number.isFinite(v))) {
    throw new BundleFormatError(path, "expected finite numbers");
  }
  return arr as number[];
}

/** Parse + validate a bundle document; errors carry the field path. */
export function loadBundle(text: string): RunBundle {
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch (err) {
    throw new BundleFormatError("", `not JSON (${(err as Error).message})`);
  }
  if (typeof data !== "object" || data === null) {
    throw new BundleFormatError("", "expected a JSON object");
  }
  const doc = data as Record<string, unknown>;
  if (doc.format_version !== 1) {
    throw new BundleFormatError("format_version", `unsupported version ${doc.format_version}`);
  }
  const labels = expectArray(doc.agent_labels, "agent_labels");
  if (!labels.length || !labels.every((v) => typeof v === "string")) {
    throw new BundleFormatError("agent_labels", "expected nonempty string array");
  }
  const n = labels.length;
  if (typeof doc.archives !== "object" || doc.archives === null) {
    throw new BundleFormatError("archives", "expected an object");
  }
  const archives = doc.archives as Record<string, unknown>;
  const keys = Object.keys(archives);
  if (!keys.length) throw new BundleFormatError("archives", "no structures");
  for (const key of keys) {
    let blocks;
    try {
      blocks = parseKey(key);
    } catch {
      throw new BundleFormatError(`archives/${key}`, "malformed structure key");
    }
    if (agentCount(blocks) !== n) {
      throw new BundleFormatError(`archives/${key}`, "structure does not cover the agents");
    }
    const points = expectArray(archives[key], `archives/${key}`);
    if (!points.length) throw new BundleFormatError(`archives/${key}`, "empty archive");
    points.forEach((p, i) => {
      const row = p as Record<string, unknown>;
      const vals = expectNumbers(row.agent_values, `archives/${key}/${i}/agent_values`);
      if (vals.length !== n) {
        throw new BundleFormatError(
          `archives/${key}/${i}/agent_values`, `expected ${n} values, got ${vals.length}`,
        );
      }
      expectNumbers(row.decision, `archives/${key}/${i}/decision`);
    });
  }
  if (typeof doc.scenario !== "object" || doc.scenario === null) {
    throw new BundleFormatError("scenario", "expected an object");
  }
  return doc as unknown as RunBundle;
}

/** Python-style %.17g for a double. */
export function formatNumber(x: number, precision = 17): string {
  if (!Number.isFinite(x)) throw new Error("cannot serialize non-finite number");
  if (Number.isInteger(x) && Math.abs(x) < 1e17) {
    return Object.is(x, -0) ? "-0" : x.toFixed(0);
  }
  let s = x.toPrecision(precision);
  if (s.includes("e")) {
    let [mant, exp] = s.split("e");
    if (mant.includes(".")) mant = mant.replace(/0+$/, "").replace(/\.$/, "");
    const sign = exp.startsWith("-") ? "-" : "+";
    const digits = exp.replace(/[+-]/, "").padStart(2, "0");
    return `${mant}e${sign}${digits}`;
  }
  if (s.includes(".")) s = s.replace(/0+$/, "").replace(/\.$/, "");
  return s;
}

/** Canonical JSON: sorted keys, fixed separators, %.17g floats.  The
 * same document always produces the same bytes. */
export function canonicalJson(value: unknown, precision = 17): string {
  const out: string[] = [];
  const walk = (v: unknown): void => {
    if (v === null || v === true || v === false) {
      out.push(v === null ? "null" : v ? "true" : "false");
    } else if (typeof v === "string") {
      out.push(JSON.stringify(v));
    } else if (typeof v === "number") {
      out.push(formatNumber(v, precision));
    } else if (Array.isArray(v)) {
      out.push("[");
      v.forEach((item, i) => {
        if (i) out.push(",");
        walk(item);
      });
      out.push("]");
    } else if (typeof v === "object") {
      const obj = v as Record<string, unknown>;
      out.push("{");
      Object.keys(obj)
        .sort()
        .forEach((key, i) => {
          if (i) out.push(",");
          out.push(JSON.stringify(key), ":");
          walk(obj[key]);
        });
      out.push("}");
    } else {
      throw new Error(`cannot serialize ${typeof v}`);
    }
  };
  walk(value);
  return out.join("");
}

/** The export format: byte-identical to the CLI's JSON report after
 * both sides pass through the same canonical float formatting. */
export function exportReport(report: unknown): string {
  return canonicalJson(report);
}
