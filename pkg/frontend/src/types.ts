/** Shared data shapes: run bundles and derived game reports. */

export interface ArchivePoint {
  decision: number[];
  agent_values: number[];
}

export interface BundleScenario {
  name: string;
  model: string;
  agent_labels: string[];
  agent_weights?: number[];
  rate_unit?: string;
  volume_unit?: string;
  [key: string]: unknown;
}

export interface RunBundle {
  format_version: number;
  scenario: BundleScenario;
  agent_labels: string[];
  method: string;
  strategy?: string | null;
  config?: Record<string, unknown>;
  seed?: number | null;
  archives: Record<string, ArchivePoint[]>;
  budget?: Record<string, unknown>;
  games?: Record<string, unknown>;
}

export type Criterion =
  | { kind: "utopia"; beta: number[]; p: number }
  | { kind: "favor"; agent: number }; // 1-based, as on the CLI

export type DeviationClassName = "single" | "pair" | "subset";

export interface DeviationRule {
  classes: DeviationClassName[];
  eta: number;
}

export interface StructureRow {
  key: string;
  level: number;
  payoffs: number[];
  values: Record<string, number>;
  welfare: number;
}

export interface ExternalityRecord {
  coalition: string;
  coarse: string;
  fine: string;
  value: number;
}

export interface GameReport {
  criterion: { kind: "utopia"; beta: number[]; p: number } | { kind: "favor"; agent: number };
  deviation_rule: { classes: string[]; eta: number };
  rounded: boolean;
  structures: StructureRow[];
  externalities: ExternalityRecord[];
  externality_class: "negative" | "positive" | "mixed" | "zero";
  welfare_max: string[];
  stable: string[];
}
