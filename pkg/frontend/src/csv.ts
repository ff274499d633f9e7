/** CSV loading and the per-kind column contracts. */

import * as fs from "node:fs";

export type PlotKind = "heatmap" | "loglog-scan" | "loglog-ksweep" | "identity-table";

export interface Table {
  header: string[];
  rows: string[][];
  path: string;
}

export class ContractError extends Error {}

export function readCsv(path: string): Table {
  const text = fs.readFileSync(path, "utf-8");
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new ContractError(`${path}: empty CSV (no header)`);
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((l) => l.split(","));
  if (rows.length === 0) {
    throw new ContractError(`${path}: no data rows`);
  }
  for (const r of rows) {
    if (r.length !== header.length) {
      throw new ContractError(
        `${path}: row has ${r.length} cells, header has ${header.length}`,
      );
    }
  }
  return { header, rows, path };
}

export function column(t: Table, name: string): string[] {
  const i = t.header.indexOf(name);
  if (i < 0) {
    throw new ContractError(`${t.path}: missing required column '${name}'`);
  }
  return t.rows.map((r) => r[i]);
}

export function numericColumn(t: Table, name: string): number[] {
  return column(t, name).map(Number);
}

/** Error columns (err_ or maxerr_ prefixed) in header order. */
export function errorColumns(t: Table, prefix: string): Array<{ method: string; values: number[] }> {
  const out: Array<{ method: string; values: number[] }> = [];
  for (const name of t.header) {
    if (name.startsWith(prefix)) {
      out.push({ method: name.slice(prefix.length), values: numericColumn(t, name) });
    }
  }
  if (out.length === 0) {
    throw new ContractError(`${t.path}: missing required column '${prefix}<method>'`);
  }
  return out;
}

const REQUIRED: Record<PlotKind, string[]> = {
  heatmap: ["x1", "x2", "side", "ell"],
  "loglog-scan": ["ell"],
  "loglog-ksweep": ["k"],
  "identity-table": ["case", "region", "N", "residual"],
};

export function validate(kind: PlotKind, t: Table): void {
  for (const name of REQUIRED[kind]) {
    column(t, name);
  }
  if (kind === "heatmap" || kind === "loglog-scan") {
    errorColumns(t, "err_");
  }
  if (kind === "loglog-ksweep") {
    errorColumns(t, "maxerr_");
  }
}
