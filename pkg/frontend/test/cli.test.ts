import { existsSync, mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";
import { parseJobSpec, runJob } from "../src/cli.js";
import { SchemaError } from "../src/csv.js";

const dir = mkdtempSync(join(tmpdir(), "plot-cli-"));

const input = join(dir, "comparison.csv");
writeFileSync(input, "iteration,residual_swa\n1,1.0\n2,0.1\n");

function writeSpec(name: string, spec: unknown): string {
  const path = join(dir, name);
  writeFileSync(path, JSON.stringify(spec));
  return path;
}

describe("parseJobSpec", () => {
  it("accepts a complete job", () => {
    const spec = writeSpec("ok.json", {
      kind: "residuals", input, output: join(dir, "out.svg"),
    });
    expect(parseJobSpec(spec).kind).toBe("residuals");
  });

  it("rejects an unknown figure kind", () => {
    const spec = writeSpec("kind.json", {
      kind: "pie", input, output: "out.svg",
    });
    expect(() => parseJobSpec(spec)).toThrow('"kind" must be one of');
  });

  it("rejects a missing input file", () => {
    const spec = writeSpec("missing.json", {
      kind: "residuals", input: join(dir, "nope.csv"), output: "out.svg",
    });
    expect(() => parseJobSpec(spec)).toThrow("input file not found");
  });

  it("rejects invalid JSON", () => {
    const path = join(dir, "broken.json");
    writeFileSync(path, "{kind:");
    expect(() => parseJobSpec(path)).toThrow(SchemaError);
  });
});

describe("runJob", () => {
  it("writes the rendered figure to the output path", () => {
    const output = join(dir, "residuals.svg");
    const spec = writeSpec("run.json", { kind: "residuals", input, output });
    expect(runJob(spec)).toBe(output);
    expect(existsSync(output)).toBe(true);
  });

  it("writes nothing when the input table is malformed", () => {
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "iteration,residual_swa\n");
    const output = join(dir, "never.svg");
    const spec = writeSpec("bad.json", {
      kind: "residuals", input: bad, output,
    });
    expect(() => runJob(spec)).toThrow(SchemaError);
    expect(existsSync(output)).toBe(false);
  });
});
