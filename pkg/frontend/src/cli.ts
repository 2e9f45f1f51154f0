#!/usr/bin/env node
/** `plot <job-spec>`: render one figure from the solver CLI's tables.
 *
 * The job spec is a small JSON file:
 *   { "kind": "residuals", "input": "out/compare/comparison.csv",
 *     "output": "out/residuals.svg" }
 */

import { existsSync, readFileSync, writeFileSync } from "node:fs";
import { FIGURE_KINDS, FigureKind, render } from "./figures.js";
import { SchemaError } from "./csv.js";

interface PlotJob {
  kind: FigureKind;
  input: string;
  output: string;
}

export function parseJobSpec(path: string): PlotJob {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, "utf-8"));
  } catch (err) {
    throw new SchemaError(`${path}: ${(err as Error).message}`);
  }
  const job = raw as Partial<PlotJob>;
  if (!job.kind || !(FIGURE_KINDS as string[]).includes(job.kind)) {
    throw new SchemaError(
      `${path}: "kind" must be one of ${FIGURE_KINDS.join(", ")}`,
    );
  }
  if (typeof job.input !== "string" || typeof job.output !== "string") {
    throw new SchemaError(`${path}: "input" and "output" paths are required`);
  }
  if (!existsSync(job.input)) {
    throw new SchemaError(`${path}: input file not found: ${job.input}`);
  }
  return job as PlotJob;
}

export function runJob(specPath: string): string {
  const job = parseJobSpec(specPath);
  const svg = render(job.kind, job.input);
  writeFileSync(job.output, svg);
  return job.output;
}

function main(argv: string[]): number {
  if (argv.length !== 1) {
    process.stderr.write("usage: plot <job-spec.json>\n");
    return 2;
  }
  try {
    const out = runJob(argv[0]);
    process.stdout.write(`${out}\n`);
    return 0;
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
