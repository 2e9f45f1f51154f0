/** The four figure kinds rendered from the solver CLI's tables. */

import {
  column, columnIndex, columnsWithPrefix, readTable, SchemaError, Table,
} from "./csv.js";
import {
  Area, Figure, HEIGHT, linearScale, logScale, logTicks, PALETTE, plotArea,
  ticks, WIDTH,
} from "./svg.js";

function finitePositive(values: number[]): number[] {
  return values.filter((v) => Number.isFinite(v) && v > 0);
}

function extent(values: number[]): [number, number] {
  const finite = values.filter(Number.isFinite);
  if (finite.length === 0) {
    throw new SchemaError("no finite values to plot");
  }
  return [Math.min(...finite), Math.max(...finite)];
}

/** Log-scale residual curves vs iteration.
 *
 * Accepts either a `compare` table (iteration, residual_<variant>...) or a
 * single-run residual table (step, iteration, r_<constraint>...). Exact
 * zeros cannot appear on a log axis and are clipped to the plot floor. */
export function renderResiduals(path: string): string {
  const table = readTable(path);
  let series = columnsWithPrefix(table, "residual_");
  if (series.length === 0) {
    series = columnsWithPrefix(table, "r_");
  }
  if (series.length === 0) {
    throw new SchemaError(
      `${path}: missing required column "residual_*" or "r_*"`,
    );
  }
  const iters = column(table, "iteration", path);
  const curves = series
    .map((name) => ({ name, values: column(table, name, path) }))
    .filter((c) => finitePositive(c.values).length > 0);
  if (curves.length === 0) {
    throw new SchemaError(`${path}: residual columns contain no positive values`);
  }

  const positives = curves.flatMap((c) => finitePositive(c.values));
  const lo = Math.min(...positives);
  const hi = Math.max(...positives);
  const floor = lo;
  const area = plotArea();
  const sx = linearScale(Math.min(...iters), Math.max(...iters), area.x0, area.x1);
  const sy = logScale(lo, hi, area.y0, area.y1);

  const fig = new Figure();
  fig.axes(sx, sy, ticks(Math.min(...iters), Math.max(...iters)),
    logTicks(lo, hi), "iteration", "residual norm",
    (v) => v.toExponential(0));
  curves.forEach((curve, i) => {
    const clipped = curve.values.map((v) =>
      Number.isFinite(v) ? Math.max(v, floor) : NaN);
    fig.polyline(iters, clipped, sx, sy, PALETTE[i % PALETTE.length]);
  });
  fig.legend(
    curves.map((c) => c.name.replace(/^residual_/, "")),
    curves.map((_, i) => PALETTE[i % PALETTE.length]),
  );
  fig.title("residual convergence");
  return fig.render();
}

/** Car parking: x-y path on top, control traces with limits below. */
export function renderCarTraj(path: string): string {
  const table = readTable(path);
  for (const name of ["x", "y", "u_steer", "u_accel", "copy_steer"]) {
    columnIndex(table, name, path);
  }
  const height = 2 * HEIGHT - 80;
  const fig = new Figure(WIDTH, height);
  const xs = column(table, "x", path);
  const ys = column(table, "y", path);
  const ks = column(table, "k", path);

  const top: Area = { x0: 64, x1: WIDTH - 16, y0: HEIGHT - 60, y1: 28 };
  const [xLo, xHi] = extent(xs.concat([0]));
  const [yLo, yHi] = extent(ys.concat([0]));
  const sx = linearScale(xLo - 0.1, xHi + 0.1, top.x0, top.x1);
  const sy = linearScale(yLo - 0.1, yHi + 0.1, top.y0, top.y1);
  fig.axes(sx, sy, ticks(xLo, xHi), ticks(yLo, yHi), "x [m]", "y [m]",
    undefined, top);
  fig.polyline(xs, ys, sx, sy, PALETTE[0]);
  fig.circle(sx(xs[0]), sy(ys[0]), 4, PALETTE[2]);
  fig.circle(sx(0), sy(0), 4, PALETTE[3]);
  fig.title("parking trajectory (green start, red goal)");

  const bottom: Area = {
    x0: 64, x1: WIDTH - 16, y0: height - 44, y1: HEIGHT + 10,
  };
  const steer = column(table, "copy_steer", path);
  const accel = column(table, "copy_accel", path);
  const [kLo, kHi] = extent(ks);
  const [uLo, uHi] = extent(steer.concat(accel));
  const sk = linearScale(kLo, kHi, bottom.x0, bottom.x1);
  const su = linearScale(uLo - 0.2, uHi + 0.2, bottom.y0, bottom.y1);
  fig.axes(sk, su, ticks(kLo, kHi), ticks(uLo, uHi), "time step",
    "control", undefined, bottom);
  fig.polyline(ks, steer, sk, su, PALETTE[0]);
  fig.polyline(ks, accel, sk, su, PALETTE[1]);
  fig.legend(["steering rate", "acceleration"], [PALETTE[0], PALETTE[1]]);
  return fig.render();
}

interface ConsensusRows {
  cen: [number[], number[]];
  wbd: [number[], number[]];
}

/** Centroidal vs whole-body CoM paths at selected logged iterations. */
export function renderComConsensus(
  path: string, requested: number[] = [2, 10, 30],
): string {
  const table = readTable(path);
  const step = column(table, "step", path);
  const iter = column(table, "iteration", path);
  const cenX = column(table, "cen_x", path);
  const cenZ = column(table, "cen_z", path);
  const wbdX = column(table, "wbd_x", path);
  const wbdZ = column(table, "wbd_z", path);

  const steps = [...new Set(step)].sort((a, b) => a - b);
  // steps that converge early have no later iterations logged: clamp each
  // requested mark to the step's final recorded iteration
  const marks = new Map<number, ConsensusRows>();
  for (const target of requested) {
    const cen: [number[], number[]] = [[], []];
    const wbd: [number[], number[]] = [[], []];
    for (const s of steps) {
      const last = Math.max(
        ...iter.filter((_, i) => step[i] === s));
      const use = Math.min(target, last);
      for (let i = 0; i < step.length; i++) {
        if (step[i] === s && iter[i] === use) {
          cen[0].push(cenX[i]);
          cen[1].push(cenZ[i]);
          wbd[0].push(wbdX[i]);
          wbd[1].push(wbdZ[i]);
        }
      }
    }
    if (cen[0].length > 0) {
      marks.set(target, { cen, wbd });
    }
  }
  if (marks.size === 0) {
    throw new SchemaError(`${path}: no rows at requested iterations`);
  }

  const allX: number[] = [];
  const allZ: number[] = [];
  for (const { cen, wbd } of marks.values()) {
    allX.push(...cen[0], ...wbd[0]);
    allZ.push(...cen[1], ...wbd[1]);
  }
  const [xLo, xHi] = extent(allX);
  const [zLo, zHi] = extent(allZ);
  const area = plotArea();
  const sx = linearScale(xLo - 0.05, xHi + 0.05, area.x0, area.x1);
  const sy = linearScale(zLo - 0.02, zHi + 0.02, area.y0, area.y1);

  const fig = new Figure();
  fig.axes(sx, sy, ticks(xLo, xHi), ticks(zLo, zHi),
    "CoM x [m]", "CoM z [m]");
  let i = 0;
  const labels: string[] = [];
  const colors: string[] = [];
  for (const [mark, { cen, wbd }] of marks) {
    const color = PALETTE[i % PALETTE.length];
    fig.polyline(cen[0], cen[1], sx, sy, color);
    fig.polyline(wbd[0], wbd[1], sx, sy, color, "4 3");
    labels.push(`iteration ${mark}`);
    colors.push(color);
    i += 1;
  }
  fig.legend(labels, colors);
  fig.title("CoM consensus (solid centroidal, dashed whole-body)");
  return fig.render();
}

// generalized-state layout: s0..s1 CoM, s2 pitch-like angle, s3..s8 the
// whole-body configuration (base_x, base_z, pitch, hip, knee1, knee2)
const Q_OFFSET = 3;

/** Joint points of one leg chain: hip -> knee -> foot. */
function legPoints(
  q: number[], thigh: number, shank: number, leg: 1 | 2,
): [number, number][] {
  const pitch = q[2];
  const thighAngle = leg === 1 ? pitch : pitch + q[3];
  const shankAngle = thighAngle + (leg === 1 ? q[4] : q[5]);
  const hip: [number, number] = [q[0], q[1]];
  const knee: [number, number] = [
    hip[0] + thigh * Math.sin(thighAngle),
    hip[1] - thigh * Math.cos(thighAngle),
  ];
  const foot: [number, number] = [
    knee[0] + shank * Math.sin(shankAngle),
    knee[1] - shank * Math.cos(shankAngle),
  ];
  return [hip, knee, foot];
}

/** Stick-figure snapshots sampled along the walker trajectory. */
export function renderWalkerFrames(
  path: string, framesPerStep = 3, thigh = 0.5, shank = 0.5,
): string {
  const table = readTable(path);
  for (let i = 0; i < 9; i++) {
    columnIndex(table, `s${i}`, path);
  }
  const stepCol = column(table, "step", path);
  const qCols: number[][] = [];
  for (let i = 0; i < 6; i++) {
    qCols.push(column(table, `s${Q_OFFSET + i}`, path));
  }
  const steps = [...new Set(stepCol)].sort((a, b) => a - b);

  const frames: number[][] = [];
  for (const s of steps) {
    const indices = stepCol
      .map((v, i) => (v === s ? i : -1))
      .filter((i) => i >= 0);
    for (let f = 0; f < framesPerStep; f++) {
      const at = indices[Math.floor((f * (indices.length - 1)) / Math.max(framesPerStep - 1, 1))];
      frames.push(qCols.map((col) => col[at]));
    }
  }

  const pts: [number, number][] = [];
  for (const q of frames) {
    pts.push(...legPoints(q, thigh, shank, 1), ...legPoints(q, thigh, shank, 2));
  }
  const [xLo, xHi] = extent(pts.map((p) => p[0]));
  const [zLo, zHi] = extent(pts.map((p) => p[1]));
  const area = plotArea();
  // equal aspect so the legs are not distorted
  const spanX = Math.max(xHi - xLo + 0.2, 0.5);
  const spanZ = Math.max(zHi - zLo + 0.2, 0.5);
  const scale = Math.min(
    (area.x1 - area.x0) / spanX, (area.y0 - area.y1) / spanZ);
  const sx = linearScale(xLo - 0.1, xLo - 0.1 + spanX,
    area.x0, area.x0 + scale * spanX);
  const sy = linearScale(zLo - 0.1, zLo - 0.1 + spanZ,
    area.y0, area.y0 - scale * spanZ);

  const fig = new Figure();
  fig.axes(sx, sy, ticks(xLo, xHi), ticks(zLo, zHi), "x [m]", "z [m]");
  frames.forEach((q, i) => {
    const color = PALETTE[i % PALETTE.length];
    for (const leg of [1, 2] as const) {
      const chain = legPoints(q, thigh, shank, leg);
      fig.polyline(
        chain.map((p) => p[0]), chain.map((p) => p[1]), sx, sy, color);
    }
    fig.circle(sx(q[0]), sy(q[1]), 3, color);
  });
  fig.title("walker frames");
  return fig.render();
}

export type FigureKind =
  | "residuals" | "car_traj" | "com_consensus" | "walker_frames";

export const FIGURE_KINDS: FigureKind[] = [
  "residuals", "car_traj", "com_consensus", "walker_frames",
];

export function render(kind: FigureKind, input: string): string {
  switch (kind) {
    case "residuals":
      return renderResiduals(input);
    case "car_traj":
      return renderCarTraj(input);
    case "com_consensus":
      return renderComConsensus(input);
    case "walker_frames":
      return renderWalkerFrames(input);
  }
}
