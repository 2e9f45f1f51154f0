import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";
import {
  renderCarTraj, renderComConsensus, renderResiduals, renderWalkerFrames,
} from "../src/figures.js";
import { SchemaError } from "../src/csv.js";

const dir = mkdtempSync(join(tmpdir(), "plots-"));

function write(name: string, text: string): string {
  const path = join(dir, name);
  writeFileSync(path, text);
  return path;
}

function count(svg: string, needle: string): number {
  return svg.split(needle).length - 1;
}

describe("renderResiduals", () => {
  const comparison = write(
    "comparison.csv",
    "iteration,residual_swa,residual_vanilla\n" +
      "1,1.0,2.0\n2,0.1,0.5\n3,0.001,0.05\n",
  );

  it("draws one curve per residual_* column on a log axis", () => {
    const svg = renderResiduals(comparison);
    expect(count(svg, "<polyline")).toBe(2);
    // log-axis tick labels are rendered in exponential form
    expect(svg).toContain("1e-3");
    expect(svg).toContain("1e+0");
  });

  it("labels the legend with the variant names", () => {
    const svg = renderResiduals(comparison);
    expect(svg).toContain(">swa<");
    expect(svg).toContain(">vanilla<");
  });

  it("accepts a single-run residual table via the r_* columns", () => {
    const path = write(
      "residuals.csv",
      "step,iteration,r_c,r_f\n0,1,1.0,0.1\n0,2,0.5,0.0\n",
    );
    const svg = renderResiduals(path);
    expect(count(svg, "<polyline")).toBe(2);
  });

  it("drops columns with no positive values instead of breaking the log axis", () => {
    const path = write(
      "zeros.csv",
      "iteration,residual_a,residual_b\n1,0.0,1.0\n2,0.0,0.5\n",
    );
    const svg = renderResiduals(path);
    expect(count(svg, "<polyline")).toBe(1);
  });

  it("rejects a table with no residual columns", () => {
    const path = write("none.csv", "iteration,cost\n1,2\n");
    expect(() => renderResiduals(path))
      .toThrow('missing required column "residual_*" or "r_*"');
  });

  it("is deterministic", () => {
    expect(renderResiduals(comparison)).toBe(renderResiduals(comparison));
  });
});

describe("renderCarTraj", () => {
  const traj = write(
    "trajectory.csv",
    "k,x,y,heading,speed,u_steer,u_accel,copy_steer,copy_accel\n" +
      "0,1.0,2.0,0,0,0.1,0.5,0.1,0.5\n" +
      "1,0.5,1.0,0,0,-0.1,0.2,-0.1,0.2\n" +
      "2,0.1,0.2,0,0,0.0,0.0,0.0,0.0\n",
  );

  it("draws the path and both control traces", () => {
    const svg = renderCarTraj(traj);
    expect(count(svg, "<polyline")).toBe(3);
    expect(count(svg, "<circle")).toBe(2); // start and goal markers
    expect(svg).toContain("steering rate");
  });

  it("names a missing column", () => {
    const path = write(
      "bad_traj.csv",
      "k,x,heading,speed,u_steer,u_accel,copy_steer,copy_accel\n" +
        "0,1,0,0,0,0,0,0\n",
    );
    expect(() => renderCarTraj(path))
      .toThrow('missing required column "y"');
  });
});

describe("renderComConsensus", () => {
  function consensusRows(step: number, iters: number[]): string {
    const lines: string[] = [];
    for (const it of iters) {
      for (let k = 0; k < 3; k++) {
        const x = step * 0.25 + 0.05 * k;
        lines.push(
          `${step},${it},${k},${x},0.8,${x + 0.01 / it},0.81`,
        );
      }
    }
    return lines.join("\n");
  }

  const consensus = write(
    "com_consensus.csv",
    "step,iteration,k,cen_x,cen_z,wbd_x,wbd_z\n" +
      consensusRows(0, [2, 10, 30]) + "\n" +
      consensusRows(1, [2, 10, 30]) + "\n",
  );

  it("draws a solid and dashed pair per requested iteration", () => {
    const svg = renderComConsensus(consensus);
    // 3 marks x (centroidal + whole-body) curves
    expect(count(svg, "<polyline")).toBe(6);
    expect(count(svg, 'stroke-dasharray="4 3"')).toBe(3);
    expect(svg).toContain("iteration 30");
  });

  it("clamps marks past a step's last logged iteration", () => {
    const path = write(
      "short.csv",
      "step,iteration,k,cen_x,cen_z,wbd_x,wbd_z\n" +
        consensusRows(0, [2, 5]) + "\n",
    );
    const svg = renderComConsensus(path, [2, 30]);
    expect(count(svg, "<polyline")).toBe(4); // mark 30 falls back to 5
  });

  it("names a missing column", () => {
    const path = write(
      "bad_consensus.csv",
      "step,iteration,k,cen_x,cen_z,wbd_x\n0,2,0,0,0,0\n",
    );
    expect(() => renderComConsensus(path))
      .toThrow('missing required column "wbd_z"');
  });
});

describe("renderWalkerFrames", () => {
  function stateRow(step: number, k: number, baseX: number): string {
    const s = new Array(18).fill(0);
    s[0] = baseX; // CoM x
    s[1] = 0.8; // CoM z
    s[3] = baseX; // base x
    s[4] = 0.95; // base z
    s[5] = 0.1; // pitch
    s[6] = -0.3; // hip
    s[7] = 0.2; // knee 1
    s[8] = 0.4; // knee 2
    const u = [0, 0, 0];
    const copies = s.concat(u);
    return [step, k, ...s, ...u, ...copies].join(",");
  }

  const header =
    "step,k," +
    Array.from({ length: 18 }, (_, i) => `s${i}`).join(",") +
    ",u0,u1,u2," +
    Array.from({ length: 18 }, (_, i) => `copy_s${i}`).join(",") +
    ",copy_u0,copy_u1,copy_u2\n";

  const traj = write(
    "walker.csv",
    header +
      [0, 1].flatMap((step) =>
        [0, 1, 2, 3, 4].map((k) => stateRow(step, k, 0.25 * step + 0.05 * k)),
      ).join("\n") + "\n",
  );

  it("draws two leg chains per frame", () => {
    const svg = renderWalkerFrames(traj, 3);
    // 2 steps x 3 frames x 2 legs
    expect(count(svg, "<polyline")).toBe(12);
    expect(count(svg, "<circle")).toBe(6); // one hip marker per frame
  });

  it("names a missing state column", () => {
    const path = write(
      "bad_walker.csv",
      "step,k,s0,s1,s2\n0,0,0,0,0\n",
    );
    expect(() => renderWalkerFrames(path)).toThrow(SchemaError);
    expect(() => renderWalkerFrames(path))
      .toThrow('missing required column "s3"');
  });
});
