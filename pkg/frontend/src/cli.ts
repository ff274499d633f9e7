#!/usr/bin/env node
/**
 * lpsub-plot <kind> <in.csv> <out.png> [--title ...] [--method ...]
 *
 * kinds: heatmap | loglog-scan | loglog-ksweep | identity-table
 */

import { ContractError, PlotKind } from "./csv.js";
import { PlotJob, render } from "./plots.js";

const KINDS: PlotKind[] = ["heatmap", "loglog-scan", "loglog-ksweep", "identity-table"];

export function parseArgs(argv: string[]): PlotJob {
  const positional: string[] = [];
  const flags: Record<string, string> = {};
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a.startsWith("--")) {
      const key = a.slice(2);
      const val = argv[i + 1];
      if (val === undefined) throw new Error(`flag --${key} needs a value`);
      flags[key] = val;
      i++;
    } else {
      positional.push(a);
    }
  }
  if (positional.length !== 3) {
    throw new Error("usage: lpsub-plot <kind> <in.csv> <out.png> [--title ...] [--method ...]");
  }
  const [kind, input, output] = positional;
  if (!KINDS.includes(kind as PlotKind)) {
    throw new Error(`unknown plot kind '${kind}' (expected ${KINDS.join(" | ")})`);
  }
  return { kind: kind as PlotKind, input, output, title: flags.title, method: flags.method };
}

export function main(argv: string[]): number {
  let job: PlotJob;
  try {
    job = parseArgs(argv);
  } catch (err) {
    console.error((err as Error).message);
    return 2;
  }
  try {
    render(job);
  } catch (err) {
    if (err instanceof ContractError) {
      console.error(`contract error: ${(err as Error).message}`);
      return 1;
    }
    console.error((err as Error).message);
    return 1;
  }
  console.log(`wrote ${job.output}`);
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  new URL(import.meta.url).pathname === process.argv[1];
if (invokedDirectly || process.argv[1]?.endsWith("lpsub-plot")) {
  process.exit(main(process.argv.slice(2)));
}
