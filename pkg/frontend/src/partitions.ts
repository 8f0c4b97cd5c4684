/** Coalition-structure text keys and the operations the game needs.
 *
 * Keys look like "{1,3}|{2,4}": 1-based members, members sorted inside
 * each coalition, coalitions sorted by smallest member.  All functions
 * work on 0-based member arrays internally.
 */

export type Blocks = number[][];

export function parseKey(key: string): Blocks {
  return key.split("|").map((chunk) => {
    const trimmed = chunk.trim();
    if (!trimmed.startsWith("{") || !trimmed.endsWith("}")) {
      throw new Error(`malformed structure key: ${key}`);
    }
    return trimmed
      .slice(1, -1)
      .split(",")
      .map((tok) => {
        const v = Number(tok);
        if (!Number.isInteger(v) || v < 1) {
          throw new Error(`malformed structure key: ${key}`);
        }
        return v - 1;
      });
  });
}

export function canonicalKey(blocks: Blocks): string {
  const sorted = blocks
    .map((b) => [...b].sort((x, y) => x - y))
    .sort((a, b) => a[0] - b[0]);
  return sorted.map((b) => `{${b.map((v) => v + 1).join(",")}}`).join("|");
}

export function canonicalBlocks(blocks: Blocks): Blocks {
  return blocks
    .map((b) => [...b].sort((x, y) => x - y))
    .sort((a, b) => a[0] - b[0]);
}

export function agentCount(blocks: Blocks): number {
  return blocks.reduce((n, b) => n + b.length, 0);
}

/** Structure keys ordered the way the engine orders them: by level,
 * then by key text. */
export function orderedKeys(keys: string[]): string[] {
  return [...keys].sort((a, b) => {
    const la = a.split("|").length;
    const lb = b.split("|").length;
    if (la !== lb) return la - lb;
    return a < b ? -1 : a > b ? 1 : 0;
  });
}

/** For each agent, the index of its coalition. */
export function ownerOf(blocks: Blocks, nAgents: number): number[] {
  const owner = new Array<number>(nAgents).fill(-1);
  blocks.forEach((b, i) => b.forEach((a) => (owner[a] = i)));
  return owner;
}

/** True iff every coalition of `coarse` is a union of `fine` coalitions. */
export function isRefinement(fine: Blocks, coarse: Blocks, nAgents: number): boolean {
  const owner = ownerOf(coarse, nAgents);
  return fine.every((b) => b.every((a) => owner[a] === owner[b[0]]));
}

/** The structure after `movers` leave their coalitions and form one new
 * coalition; residual coalitions persist. */
export function afterDeviation(blocks: Blocks, movers: number[]): Blocks {
  const moving = new Set(movers);
  const parts: Blocks = [[...movers].sort((x, y) => x - y)];
  for (const b of blocks) {
    const rest = b.filter((a) => !moving.has(a));
    if (rest.length) parts.push(rest);
  }
  return canonicalBlocks(parts);
}

/** Merge coalitions i and j of a structure. */
export function mergeBlocks(blocks: Blocks, i: number, j: number): Blocks {
  const parts: Blocks = blocks.filter((_, idx) => idx !== i && idx !== j);
  parts.push([...blocks[i], ...blocks[j]].sort((x, y) => x - y));
  return canonicalBlocks(parts);
}

/** Edges of the coalition-structure graph among the given keys:
 * (coarser, finer) pairs related by one merge. */
export function splitEdges(keys: string[], nAgents: number): Array<[string, string]> {
  const have = new Set(keys);
  const edges: Array<[string, string]> = [];
  for (const key of keys) {
    const blocks = parseKey(key);
    for (let i = 0; i < blocks.length; i++) {
      for (let j = i + 1; j < blocks.length; j++) {
        const coarse = canonicalKey(mergeBlocks(blocks, i, j));
        if (have.has(coarse)) edges.push([coarse, key]);
      }
    }
  }
  return edges.sort((a, b) => (a[0] + a[1] < b[0] + b[1] ? -1 : 1));
}
